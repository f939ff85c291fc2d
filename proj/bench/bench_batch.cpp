#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dsol/frontend/parser.hpp"
#include "dsol/parallel/batch.hpp"

using namespace dsol;

namespace {

dg::DependencyGraph graph(int n) {
    std::mt19937 rng(1);
    dg::DependencyGraph g;
    for (int i = 0; i < n; ++i) {
        dg::DGNode node;
        node.key = "n" + std::to_string(i);
        node.pos = {1 + i % 40, 1};
        g.add_node(node);
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < 2 * n; ++i) g.add_edge(pick(rng), pick(rng), static_cast<dg::DepLabel>(rng() % 3));
    return g;
}

const std::vector<frontend::IRModule>& modules() {
    static const std::vector<frontend::IRModule> out = [] {
        std::vector<frontend::IRModule> ms;
        for (int copy = 0; copy < 8; ++copy)
            for (const auto& e : std::filesystem::directory_iterator(DSOL_CORPUS_DIR)) {
                if (e.path().extension() != ".dsol") continue;
                std::ifstream in(e.path());
                std::stringstream ss;
                ss << in.rdbuf();
                ms.push_back(frontend::lower_ir(frontend::parse_source(ss.str())));
            }
        return ms;
    }();
    return out;
}

void BM_SliceAllSerial(benchmark::State& state) {
    auto g = graph(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(parallel::slice_all_serial(g));
}

void BM_SliceAllParallel(benchmark::State& state) {
    auto g = graph(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(parallel::slice_all(g));
}

void BM_TypecheckSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(parallel::check_modules_serial(modules()));
}

void BM_TypecheckParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(parallel::check_modules(modules()));
}

} // namespace

BENCHMARK(BM_SliceAllSerial)->Arg(100)->Arg(400);
BENCHMARK(BM_SliceAllParallel)->Arg(100)->Arg(400);
BENCHMARK(BM_TypecheckSerial);
BENCHMARK(BM_TypecheckParallel);

BENCHMARK_MAIN();
