// Parallel kernels against their serial references. Run with OMP_NUM_THREADS to vary width.
// The conductance reference runs one DFS per ordered pair, so it also differs in algorithm.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "coevo/conductance.hpp"
#include "coevo/content.hpp"
#include "coevo/segment.hpp"
#include "coevo/stats/regression.hpp"

using namespace coevo;

namespace {

ingest::SegmentGraph random_graph(std::size_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u;
    ingest::GraphBuilder b(true);
    for (std::size_t i = 0; i < n; ++i) b.add_node("v" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && u(rng) < density)
                b.add_interaction("v" + std::to_string(i), "v" + std::to_string(j), 1 + rng() % 3);
    return b.build();
}

ingest::Segment text_segment(std::size_t docs, std::size_t users, std::uint64_t seed) {
    static const char* vocab[] = {"river", "stone", "market", "signal", "cloud", "garden", "engine", "harbor",
                                  "lantern", "meadow", "orbit", "pepper", "quartz", "saddle", "timber", "violet"};
    std::mt19937_64 rng(seed);
    ingest::Segment s;
    for (std::size_t i = 0; i < docs; ++i) {
        std::string body;
        for (int k = 0; k < 12; ++k) body += std::string(vocab[rng() % 16]) + " ";
        std::vector<std::string> to;
        if (rng() % 3) to.push_back("u" + std::to_string(rng() % users));
        s.events.push_back({std::int64_t(i), "u" + std::to_string(rng() % users), to, std::to_string(i),
                            ingest::TokenList{{body}}, std::nullopt});
    }
    return s;
}

template <bool Parallel>
void BM_GraphConductance(benchmark::State& state) {
    const auto g = random_graph(std::size_t(state.range(0)), 0.08, 7);
    const net::ConductanceConfig config{};
    for (auto _ : state)
        benchmark::DoNotOptimize(Parallel ? net::graph_conductance(g, config)
                                          : net::graph_conductance_reference(g, config));
}

template <bool Parallel>
void BM_PairwiseSimilarity(benchmark::State& state) {
    const auto s = text_segment(std::size_t(state.range(0)), std::size_t(state.range(0)) / 2, 11);
    const auto g = ingest::build_segment_graph(s, true);
    const auto df = content::DocumentFrequencies::from_segments(std::span(&s, 1), false);
    for (auto _ : state)
        benchmark::DoNotOptimize(Parallel ? content::pairwise_similarity_by_class(s, g, df)
                                          : content::pairwise_similarity_by_class_reference(s, g, df));
}

template <bool Parallel>
void BM_NwLeaveOneOut(benchmark::State& state) {
    const auto n = state.range(0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    Eigen::MatrixXd x(n, 3);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) x(i, d) = u(rng);
        y[std::size_t(i)] = std::sin(6 * x(i, 0)) + x(i, 1) * x(i, 2) + 0.1 * u(rng);
    }
    const stats::NwModel model(x, y, stats::silverman_bandwidths(std::size_t(n), 3));
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(stats::nw_regress(x, y).loo_r2);
        } else {
            benchmark::DoNotOptimize(stats::nw_loo_predictions_reference(model));
        }
    }
}

}  // namespace

BENCHMARK_TEMPLATE(BM_GraphConductance, true)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_GraphConductance, false)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_PairwiseSimilarity, true)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_PairwiseSimilarity, false)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_NwLeaveOneOut, true)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_NwLeaveOneOut, false)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
