#include <gtest/gtest.h>

#include <random>

#include "dsol/frontend/parser.hpp"
#include "dsol/parallel/batch.hpp"
#include "support/corpus.hpp"

using namespace dsol;
using dg::DepLabel;

namespace {

dg::DependencyGraph random_graph(std::mt19937& rng, int n) {
    dg::DependencyGraph g;
    for (int i = 0; i < n; ++i) {
        dg::DGNode node;
        node.key = "n" + std::to_string(i);
        node.label = node.key;
        node.pos = {std::uniform_int_distribution<int>(1, 9)(rng), 1};
        g.add_node(node);
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < 2 * n; ++i) g.add_edge(pick(rng), pick(rng), static_cast<DepLabel>(rng() % 3));
    return g;
}

std::vector<frontend::IRModule> corpus_modules() {
    std::vector<frontend::IRModule> out;
    for (const auto& f : testsupport::corpus_files()) out.push_back(frontend::lower_ir(frontend::parse_source(testsupport::slurp(f))));
    return out;
}

} // namespace

TEST(Parallel, SlicesMatchSerial) {
    std::mt19937 rng(3);
    for (int round = 0; round < 20; ++round) {
        auto g = random_graph(rng, 1 + static_cast<int>(rng() % 120));
        for (const std::vector<DepLabel>& labels : {std::vector<DepLabel>{}, std::vector<DepLabel>{DepLabel::TD}}) {
            auto ref = parallel::slice_all_serial(g, labels);
            for (int threads : {1, 2, 4}) {
                auto got = parallel::slice_all(g, labels, threads);
                ASSERT_EQ(got.size(), ref.size());
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    EXPECT_EQ(got[i].target, ref[i].target);
                    EXPECT_EQ(got[i].nodes, ref[i].nodes);
                    EXPECT_EQ(got[i].edges, ref[i].edges);
                    EXPECT_EQ(got[i].hop, ref[i].hop);
                }
            }
        }
    }
}

TEST(Parallel, TypeChecksMatchSerial) {
    auto modules = corpus_modules();
    auto more = modules;
    modules.insert(modules.end(), more.begin(), more.end());
    auto ref = parallel::check_modules_serial(modules);
    for (int threads : {1, 3}) {
        auto got = parallel::check_modules(modules, threads);
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(got[i].to_json(), ref[i].to_json());
    }
}

TEST(Parallel, ReflexiveVerdictsMatchSerial) {
    auto modules = corpus_modules();
    std::vector<parallel::FunctionRef> refs;
    for (const auto& m : modules)
        for (const auto& fn : m.functions) refs.push_back({&m, fn.name});
    ASSERT_GE(refs.size(), 30u);
    auto ref = parallel::reflexive_serial(refs);
    auto got = parallel::reflexive(refs, {}, {}, 2);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ASSERT_EQ(got[i].has_value(), ref[i].has_value()) << refs[i].function;
        if (!ref[i]) continue;
        EXPECT_EQ(got[i]->outcome, ref[i]->outcome) << refs[i].function;
        EXPECT_EQ(got[i]->reason, ref[i]->reason) << refs[i].function;
        EXPECT_NE(got[i]->outcome, equiv::Outcome::NonEquivalent) << refs[i].function;
    }
}

TEST(Parallel, ScoresMatchSerial) {
    std::mt19937 rng(5);
    std::vector<eval::Predictions> preds;
    std::vector<eval::GroundTruth> truth;
    for (int u = 0; u < 40; ++u) {
        eval::Predictions p;
        eval::GroundTruth t;
        p.unit = t.unit = "u" + std::to_string(u);
        for (int i = 0; i < 30; ++i) {
            int line = 1 + static_cast<int>(rng() % 50);
            if (rng() % 2) p.functions.push_back({"f", line, line + 2});
            if (rng() % 2) t.functions.push_back({"f", line, line + 2});
            auto ty = types::parse_type(rng() % 2 ? "uint256" : "address");
            if (rng() % 2) p.variables.push_back({"f", "v" + std::to_string(i), ty});
            if (rng() % 2) t.variables.push_back({"f", "v" + std::to_string(i), types::parse_type("uint256")});
        }
        preds.push_back(p);
        truth.push_back(t);
    }
    auto ref = parallel::score_units_serial(preds, truth);
    auto got = parallel::score_units(preds, truth, 4);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(got[i].to_json(), ref[i].to_json());
    truth[7].unit = "other";
    EXPECT_THROW(parallel::score_units(preds, truth, 2), eval::SchemaMismatch);
    truth.pop_back();
    EXPECT_THROW(parallel::score_units(preds, truth), std::invalid_argument);
}
