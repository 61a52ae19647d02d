#pragma once

#include <set>
#include <string>

#include "hysens/gallery.hpp"

namespace hysens::gallery_detail {

/// Numeric option value, or def when absent.
double number(const GalleryOptions& opts, const std::string& key, double def);

/// Throws ValidationError naming the first key not in allowed.
void check_keys(const GalleryOptions& opts, const std::set<std::string>& allowed,
                const std::string& model);

}  // namespace hysens::gallery_detail
