#include <cmath>
#include <stdexcept>

#include "options.hpp"

namespace hysens {

namespace gallery_detail {

double number(const GalleryOptions& opts, const std::string& key, double def) {
  const auto it = opts.find(key);
  if (it == opts.end()) return def;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size() || !std::isfinite(x)) {
    throw ValidationError("option '" + key + "' is not a finite number: '" + it->second + "'");
  }
  return x;
}

void check_keys(const GalleryOptions& opts, const std::set<std::string>& allowed,
                const std::string& model) {
  for (const auto& [k, v] : opts) {
    if (!allowed.count(k)) throw ValidationError("unknown option '" + k + "' for model " + model);
  }
}

}  // namespace gallery_detail

const CostFunctional& GalleryProblem::cost(const std::string& cost_name) const {
  const auto it = costs.find(cost_name);
  if (it == costs.end()) {
    std::string known;
    for (const auto& [k, c] : costs) known += (known.empty() ? "" : ", ") + k;
    throw ValidationError("unknown cost '" + cost_name + "' for model " + name + " (known: " +
                          known + ")");
  }
  return *it->second;
}

GalleryProblem ModelRegistry::make(const std::string& name, const GalleryOptions& opts) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("unknown model '" + name + "' (known: " + known + ")");
  }
  return it->second(opts);
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, f] : factories_) out.push_back(k);
  return out;
}

const ModelRegistry& register_gallery() {
  static const ModelRegistry registry = [] {
    ModelRegistry r;
    r.add("five-bar", make_five_bar);
    r.add("bouncing-mass", make_bouncing_mass);
    r.add("pendulum", make_pendulum);
    return r;
  }();
  return registry;
}

}  // namespace hysens
