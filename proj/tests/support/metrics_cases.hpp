#pragma once

#include <string>
#include <utility>

#include "dsol/eval/eval.hpp"

namespace testsupport {

// A truth/prediction pair realising the given counts in every category:
// tp matches, fp spurious predictions, fn unpredicted truth entries.
inline std::pair<dsol::eval::Predictions, dsol::eval::GroundTruth> synthetic(std::size_t tp, std::size_t fp, std::size_t fn) {
    dsol::eval::Predictions p;
    dsol::eval::GroundTruth t;
    p.unit = t.unit = "u";
    int line = 1;
    auto span = [&] {
        dsol::eval::BoundaryEntry b{"f" + std::to_string(line), line, line + 1};
        line += 3;
        return b;
    };
    auto u256 = dsol::types::parse_type("uint256");
    for (std::size_t i = 0; i < tp; ++i) {
        auto b = span();
        p.functions.push_back(b);
        t.functions.push_back(b);
        p.variables.push_back({"f", "a" + std::to_string(i), u256});
        t.variables.push_back({"f", "a" + std::to_string(i), u256});
        p.attributes.push_back({"s" + std::to_string(i), "Fee"});
        t.attributes.push_back({"s" + std::to_string(i), "Fee"});
    }
    for (std::size_t i = 0; i < fp; ++i) {
        p.functions.push_back(span());
        p.variables.push_back({"g", "b" + std::to_string(i), u256});
        p.attributes.push_back({"x" + std::to_string(i), "Flag"});
    }
    for (std::size_t i = 0; i < fn; ++i) {
        t.functions.push_back(span());
        t.variables.push_back({"h", "c" + std::to_string(i), u256});
        t.attributes.push_back({"y" + std::to_string(i), "Limit"});
    }
    return {p, t};
}

} // namespace testsupport
