#include <doctest.h>

#include <cmath>
#include <random>

#include "coevo/conductance.hpp"
#include "coevo/error.hpp"
#include "coevo/netmetrics.hpp"
#include "oracles.hpp"

using namespace coevo;
using namespace coevo::ingest;
using coevo::net::ConductanceConfig;

namespace {

SegmentGraph graph(std::initializer_list<std::pair<const char*, const char*>> edges,
                   std::initializer_list<const char*> extra = {}) {
    GraphBuilder b(true);
    for (auto n : extra) b.add_node(n);
    for (auto [s, t] : edges) b.add_interaction(s, t);
    return b.build();
}

const auto kExact = ConductanceConfig::exact();

}  // namespace

TEST_CASE("standard metrics: directed triangle") {
    const auto r = net::standard_metrics(graph({{"a", "b"}, {"b", "c"}, {"c", "a"}}));
    CHECK(r.n_nodes == 3);
    CHECK(r.n_edges == 3);
    CHECK(r.reciprocity == 0.0);
    CHECK(r.clustering == 1.0);
    CHECK(r.lscc_size == 3);
    CHECK(r.lwcc_size == 3);
    CHECK(r.centralization == 0.0);
    CHECK(r.mean_degree == 2.0);
    CHECK(r.sd_degree == 0.0);
    CHECK(r.assortativity_degenerate);
}

TEST_CASE("standard metrics: mutual pair") {
    const auto r = net::standard_metrics(graph({{"a", "b"}, {"b", "a"}}));
    CHECK(r.reciprocity == 1.0);
    CHECK(r.clustering == 0.0);
    CHECK(r.centralization == 0.0);
    CHECK(r.lscc_size == 2);
}

TEST_CASE("standard metrics: star has Gini 0.30 by brute force") {
    const auto r = net::standard_metrics(graph({{"c", "l1"}, {"c", "l2"}, {"c", "l3"}, {"c", "l4"}}));
    const double expected = oracle::gini({4, 1, 1, 1, 1});
    CHECK(expected == doctest::Approx(0.30).epsilon(1e-15));
    CHECK(std::abs(r.centralization - expected) < 1e-12);
    CHECK(r.lscc_size == 1);
    CHECK(r.lwcc_size == 5);
    CHECK(r.clustering == 0.0);
    CHECK(r.degree_assortativity == doctest::Approx(-1.0));
}

TEST_CASE("empty graph gives a zero row flagged empty") {
    const auto r = net::standard_metrics(SegmentGraph{});
    CHECK(r.empty_graph);
    CHECK(r.n_nodes == 0);
    CHECK(r.conductance == 0);
}

TEST_CASE("gini properties") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> d(1 + rng() % 30);
        for (auto& x : d) x = double(rng() % 12);
        const double g = net::gini(d);
        CHECK(std::abs(g - oracle::gini(d)) < 1e-12);
        CHECK(g >= 0.0);
        CHECK(g < 1.0);
        auto scaled = d;
        for (auto& x : scaled) x *= 7.0;
        CHECK(std::abs(net::gini(scaled) - g) < 1e-12);
    }
    std::vector<double> flat(9, 4.0);
    CHECK(net::gini(flat) == 0.0);
}

TEST_CASE("pair conductance fixtures") {
    const auto chain = graph({{"a", "b"}, {"b", "c"}});
    CHECK(net::pair_conductance(chain, "a", "c", kExact) == 1.0);
    const auto fork = graph({{"a", "b"}, {"a", "c"}, {"b", "c"}});
    CHECK(net::pair_conductance(fork, "a", "c", kExact) == 1.0);
    CHECK(net::pair_conductance(chain, "c", "a", kExact) == 0.0);
    CHECK(net::pair_conductance(chain, "a", "zz", kExact) == 0.0);
}

TEST_CASE("graph conductance fixtures") {
    CHECK(net::graph_conductance(graph({{"a", "b"}, {"b", "c"}}), kExact) == 3.0);
    CHECK(net::graph_conductance(graph({}, {"a", "b"}), kExact) == 0.0);
    CHECK(net::graph_conductance(SegmentGraph{}, kExact) == 0.0);
}

TEST_CASE("conductance matches simple-path enumeration on random small graphs") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 60; ++t) {
        const auto g = oracle::random_graph(rng, 2 + rng() % 6, 0.45);
        const auto w = oracle::weights_of(g);
        for (const auto& i : g.nodes())
            for (const auto& j : g.nodes())
                if (i != j)
                    CHECK(std::abs(net::pair_conductance(g, i, j, kExact) -
                                   oracle::simple_path_conductance(w, i, j)) < 1e-9);
        CHECK(std::abs(net::graph_conductance(g, kExact) - net::graph_conductance_reference(g, kExact)) < 1e-9);
    }
}

TEST_CASE("parallel graph conductance is bit-identical to the per-source serial sum") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto g = oracle::random_graph(rng, 30, 0.15);
        const ConductanceConfig c{};
        double serial = 0.0;
        for (std::uint32_t s = 0; s < g.node_count(); ++s) {
            double row = 0.0;
            for (double v : net::conductance_from(g, s, c)) row += v;
            serial += row;
        }
        CHECK(net::graph_conductance(g, c) == serial);
        CHECK(net::graph_conductance_reference(g, c) == serial);
    }
}

TEST_CASE("conductance is monotone in path length and pruning") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_graph(rng, 7, 0.4);
        double prev = 0.0;
        for (std::size_t L = 1; L <= 7; ++L) {
            const double c = net::graph_conductance(g, {L, 1e-12});
            CHECK(c >= prev - 1e-15);
            prev = c;
        }
        double last = std::numeric_limits<double>::infinity();
        for (double eps : {1e-12, 1e-6, 1e-3, 1e-1, 0.5}) {
            const double c = net::graph_conductance(g, {6, eps});
            CHECK(c <= last + 1e-15);
            last = c;
        }
        for (std::uint32_t s = 0; s < g.node_count(); ++s)
            for (double v : net::conductance_from(g, s, kExact)) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 + 1e-12);
            }
    }
}

TEST_CASE("conductance config validation") {
    CHECK_THROWS_AS((ConductanceConfig{0, 1e-9}.validate()), ConfigError);
    CHECK_THROWS_AS((ConductanceConfig{4, -1.0}.validate()), ConfigError);
    CHECK_NOTHROW(kExact.validate());
}

TEST_CASE("edge jaccard fixtures and symmetry") {
    const auto ab = graph({{"a", "b"}});
    const auto abc = graph({{"a", "b"}, {"b", "c"}});
    CHECK(net::edge_jaccard(abc, abc).value == 1.0);
    CHECK(net::edge_jaccard(abc, ab).value == 0.5);
    CHECK(net::edge_jaccard(graph({{"x", "y"}}), ab).value == 0.0);
    const auto none = net::edge_jaccard(SegmentGraph{}, SegmentGraph{});
    CHECK(none.value == 0.0);
    CHECK(none.degenerate);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_graph(rng, 6, 0.3), h = oracle::random_graph(rng, 6, 0.3);
        CHECK(net::edge_jaccard(g, h).value == net::edge_jaccard(h, g).value);
    }
}

TEST_CASE("expectedness fixtures") {
    const auto chain = graph({{"a", "b"}, {"b", "c"}});
    CHECK(net::expectedness(graph({{"a", "c"}}), chain, kExact) == 1.0);
    CHECK(net::expectedness(graph({{"a", "c"}}), SegmentGraph{}, kExact) == 0.0);
    const auto ab = graph({{"a", "b"}});
    CHECK(net::expectedness(ab, ab, kExact) == 1.0);
    CHECK_FALSE(net::expectedness(graph({}, {"a"}), chain, kExact).has_value());
    // Not symmetric in time.
    CHECK(net::expectedness(chain, graph({{"a", "c"}}), kExact) == 0.0);
}

TEST_CASE("edge repeat curve fixtures") {
    const auto A = graph({{"a", "b"}, {"b", "c"}});
    const auto B = graph({{"c", "d"}});
    std::vector<SegmentGraph> same(5, A);
    for (auto [lag, p] : net::edge_repeat_curve(same, 4)) CHECK(p == 1.0);
    std::vector<SegmentGraph> disjoint = {graph({{"a", "b"}}), graph({{"b", "c"}}), graph({{"c", "d"}})};
    for (auto [lag, p] : net::edge_repeat_curve(disjoint, 2)) CHECK(p == 0.0);
    const std::vector<SegmentGraph> alt = {A, B, A, B};
    const auto curve = net::edge_repeat_curve(alt, 2);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0] == std::pair<std::size_t, double>{1, 0.0});
    CHECK(curve[1] == std::pair<std::size_t, double>{2, 1.0});
    CHECK_THROWS_AS(net::edge_repeat_curve(alt, 4), std::invalid_argument);
    CHECK_THROWS_AS(net::edge_repeat_curve(alt, 0), std::invalid_argument);
}

TEST_CASE("an added isolated node leaves flow and overlap metrics unchanged") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_graph(rng, 6, 0.35);
        GraphBuilder b(true);
        for (const auto& n : g.nodes()) b.add_node(n);
        b.add_node("zz_isolated");
        for (const auto& e : g.edges()) b.add_interaction(g.name(e.source), g.name(e.target), e.weight);
        const auto h = b.build();
        const auto rg = net::standard_metrics(g), rh = net::standard_metrics(h);
        CHECK(rh.n_nodes == rg.n_nodes + 1);
        CHECK(rh.reciprocity == rg.reciprocity);
        CHECK(rh.clustering == rg.clustering);
        CHECK(std::abs(net::graph_conductance(h, {}) - net::graph_conductance(g, {})) < 1e-12);
        const auto prev = oracle::random_graph(rng, 6, 0.35);
        CHECK(net::edge_jaccard(h, prev).value == net::edge_jaccard(g, prev).value);
    }
}

TEST_CASE("net series: cross-segment fields missing at segment 0 only") {
    std::mt19937_64 rng(19);
    std::vector<SegmentGraph> gs;
    for (int t = 0; t < 6; ++t) gs.push_back(oracle::random_graph(rng, 8, 0.3));
    const auto rows = net::compute_net_series(gs, {});
    REQUIRE(rows.size() == 6);
    CHECK_FALSE(rows[0].edge_jaccard.has_value());
    CHECK_FALSE(rows[0].expectedness.has_value());
    for (std::size_t t = 1; t < rows.size(); ++t) {
        CHECK(rows[t].edge_jaccard == net::edge_jaccard(gs[t], gs[t - 1]).value);
        CHECK(rows[t].expectedness == net::expectedness(gs[t], gs[t - 1], {}));
        CHECK(rows[t].conductance == net::graph_conductance(gs[t], {}));
        CHECK(rows[t].lscc_size <= rows[t].lwcc_size);
        CHECK(rows[t].lwcc_size <= rows[t].n_nodes);
    }
    const auto values = net::to_values(rows[0]);
    CHECK(values.size() == net::net_metric_columns().size());
}
