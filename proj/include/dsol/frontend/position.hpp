#pragma once

#include <compare>
#include <string>

namespace dsol::frontend {

struct SourcePos {
    int line = 0;
    int col = 0;

    auto operator<=>(const SourcePos&) const = default;
    std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

} // namespace dsol::frontend
