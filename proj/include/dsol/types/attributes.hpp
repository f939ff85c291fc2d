#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace dsol::types {

inline constexpr std::array<std::string_view, 7> kAttributeLabels{"Limit",  "Fee",    "Flag",  "Address",
                                                                   "Asset",  "Router", "Others"};

inline bool is_attribute_label(std::string_view s) {
    return std::find(kAttributeLabels.begin(), kAttributeLabels.end(), s) != kAttributeLabels.end();
}

} // namespace dsol::types
