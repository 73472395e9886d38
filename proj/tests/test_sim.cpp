#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "coevo/netmetrics.hpp"
#include "coevo/sim.hpp"

using namespace coevo;
using namespace coevo::sim;

namespace {

// Structure of a generated network measured by the analysis code, not by the generator.
net::NetMetricRow measure(const Network& net) {
    ingest::GraphBuilder b(true);
    for (std::uint32_t v = 0; v < net.n_nodes; ++v) b.add_node(node_name(v, net.n_nodes));
    for (const auto& e : net.edges) b.add_interaction(node_name(e.source, net.n_nodes), node_name(e.target, net.n_nodes));
    return net::standard_metrics(b.build());
}

SimConfig small(std::size_t messages = 4000) {
    SimConfig c;
    c.total_messages = messages;
    return c;
}

std::vector<double> values_of(const std::vector<ingest::EventRecord>& ev, std::size_t from, std::size_t to) {
    std::vector<double> v;
    for (std::size_t i = from; i < to; ++i) v.push_back(std::get<ingest::NumericMessage>(ev[i].payload).value);
    return v;
}

}  // namespace

TEST_CASE("config validation and json round trip") {
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.target_reciprocity = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimConfig{};
    c.n_edges = c.n_nodes * (c.n_nodes - 1) + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimConfig{};
    c.total_messages = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    SimConfig d;
    d.seed = 99;
    d.topic_enabled = true;
    d.c_topicality = 2.5;
    const nlohmann::json j = d;
    const auto back = j.get<SimConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK_THROWS_AS((nlohmann::json{{"no_such_key", 1}}.get<SimConfig>()), ConfigError);
    CHECK(nlohmann::json::object().get<SimConfig>().n_nodes == 100);
}

TEST_CASE("forward score fixtures") {
    SimConfig c;
    c.recency_tau = 10.0;
    c.send_threshold = 0.5;
    NodeState empty;
    const QueueEntry fresh{1, 10, 42.0};
    auto d = forward_score(empty, fresh, std::nullopt, 10, c);
    CHECK(d.score == 2.0);
    CHECK(d.send);

    NodeState same;
    for (std::uint32_t m = 0; m < 10; ++m) same.receive(m, 42.0, 0, 64);
    d = forward_score(same, {99, 0, 42.0}, std::nullopt, 100000, c);
    CHECK(d.score < 1e-12);
    CHECK_FALSE(d.send);

    NodeState two;
    two.receive(1, 20.0, 0, 64);
    two.receive(2, 40.0, 0, 64);
    d = forward_score(two, {3, 0, 80.0}, 80.0, 5, c);
    CHECK(std::abs(d.score - (std::exp(-0.5) + 50.0 / 99.0)) < 1e-12);
    CHECK(d.score == doctest::Approx(1.1116).epsilon(1e-4));
    CHECK(d.penalty == 0.0);
    CHECK(d.send);

    d = forward_score(two, {3, 0, 80.0}, 30.0, 5, c);
    CHECK(std::abs(d.penalty - 50.0 / 99.0) < 1e-15);
}

TEST_CASE("novelty uses only the most recent window and skips the candidate") {
    SimConfig c;
    c.novelty_window = 2;
    NodeState s;
    s.receive(1, 1.0, 0, 64);
    s.receive(2, 50.0, 0, 64);
    s.receive(3, 60.0, 0, 64);
    const auto d = forward_score(s, s.queue.back(), std::nullopt, 0, c);
    CHECK(std::abs(d.novelty - (10.0 + 59.0) / 2.0 / 99.0) < 1e-15);
}

TEST_CASE("node queue dedupes and trims") {
    NodeState s;
    CHECK(s.receive(7, 10, 0, 3));
    CHECK_FALSE(s.receive(7, 10, 1, 3));
    for (std::uint32_t m = 0; m < 5; ++m) s.receive(100 + m, 1, 2, 3);
    CHECK(s.queue.size() == 3);
    CHECK(s.queue.front().message == 102);
    CHECK_FALSE(s.receive(7, 10, 3, 3));
}

TEST_CASE("network generation: unconstrained sparse targets accepted immediately") {
    SimConfig c;
    c.n_nodes = 200;
    c.n_edges = 200;
    c.target_reciprocity = 0;
    c.target_clustering = 0;
    const auto net = generate_network(c, 3);
    CHECK(net.iterations == 0);
    CHECK(net.edges.size() == 200);
    const auto m = measure(net);
    CHECK(m.reciprocity <= 0.02);
    CHECK(m.clustering <= 0.02);
}

TEST_CASE("network generation: default targets over 20 seeds") {
    const SimConfig c;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto net = generate_network(c, seed);
        const auto m = measure(net);
        CAPTURE(seed);
        CHECK(net.edges.size() == 1000);
        CHECK(m.n_edges == 1000);
        CHECK(std::abs(m.reciprocity - 0.5) <= 0.02);
        CHECK(std::abs(m.clustering - 0.3) <= 0.02);
        CHECK(std::abs(m.reciprocity - net.reciprocity) < 1e-12);
        CHECK(std::abs(m.clustering - net.clustering) < 1e-12);
        for (const auto& e : net.edges) {
            CHECK(e.source != e.target);
            CHECK((e.weight > 0.0 && e.weight < 1.0));
        }
    }
}

TEST_CASE("network generation: saturation and unreachable targets") {
    SimConfig c;
    c.n_nodes = 6;
    c.n_edges = 30;
    const auto full = generate_network(c, 1);
    CHECK(full.infeasible);
    CHECK(full.reciprocity == 1.0);
    CHECK(full.clustering == 1.0);

    SimConfig hard;
    hard.n_nodes = 40;
    hard.n_edges = 60;
    hard.target_reciprocity = 0.0;
    hard.target_clustering = 0.95;
    hard.structure_tolerance = 0.001;
    hard.max_structure_iters = 2000;
    try {
        generate_network(hard, 1);
        FAIL("expected StructureError");
    } catch (const StructureError& e) {
        CHECK(e.code() == ExitCode::Numerical);
        CHECK(e.best_clustering < 0.95);
    }
}

TEST_CASE("topic schedule") {
    SimConfig c;
    c.topic_enabled = true;
    c.total_messages = 600'000;
    const auto topics = topic_schedule(c, 17);
    REQUIRE(topics.size() >= 1000);
    double sum = 0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < topics.size(); ++i) {
        CHECK((topics[i].value >= 1 && topics[i].value <= 100));
        CHECK(topics[i].lifetime >= 1);
        if (i < 1000) sum += double(topics[i].lifetime);
        covered += topics[i].lifetime;
    }
    CHECK(sum / 1000.0 >= 480.0);
    CHECK(sum / 1000.0 <= 520.0);
    CHECK(covered >= c.total_messages);
    const auto again = topic_schedule(c, 17);
    REQUIRE(again.size() == topics.size());
    for (std::size_t i = 0; i < topics.size(); ++i) {
        CHECK(again[i].value == topics[i].value);
        CHECK(again[i].lifetime == topics[i].lifetime);
    }
    c.topic_enabled = false;
    CHECK(topic_schedule(c, 17).empty());
}

TEST_CASE("simulation output is valid, exact in length, and deterministic") {
    auto c = small(6000);
    c.topic_enabled = true;
    const auto r = run_simulation(c);
    REQUIRE(r.events.size() == 6000);
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : r.network.edges)
        edges.insert({node_name(e.source, c.n_nodes), node_name(e.target, c.n_nodes)});
    std::int64_t last = 0;
    for (const auto& e : r.events) {
        REQUIRE(e.targets.size() == 1);
        CHECK(edges.count({e.actor, e.targets[0]}) == 1);
        CHECK(e.timestamp >= last);
        last = e.timestamp;
        const double v = std::get<ingest::NumericMessage>(e.payload).value;
        CHECK((v >= 1 && v <= 100 && v == std::round(v)));
    }
    CHECK(r.stats.forwards <= r.stats.injected + r.stats.received);
    CHECK(r.stats.topics_used >= 1);

    std::ostringstream a, b;
    ingest::serialize_events(a, r.events, ingest::LogFormat::Jsonl);
    ingest::serialize_events(b, run_simulation(c).events, ingest::LogFormat::Jsonl);
    CHECK(a.str() == b.str());
    c.seed = 2;
    std::ostringstream other;
    ingest::serialize_events(other, run_simulation(c).events, ingest::LogFormat::Jsonl);
    CHECK(other.str() != a.str());
}

TEST_CASE("with zero topicality weight the topic process leaves the log unchanged") {
    auto c = small(5000);
    c.c_topicality = 0.0;
    const auto off = run_simulation(c);
    c.topic_enabled = true;
    const auto on = run_simulation(c);
    CHECK(on.events == off.events);
}

TEST_CASE("segment entropy is bounded by the segment size") {
    const auto r = run_simulation(small(3000));
    for (std::size_t s = 0; s + 100 <= r.events.size(); s += 100)
        CHECK(message_entropy(values_of(r.events, s, s + 100)) <= std::log2(100.0) + 1e-12);
}

TEST_CASE("raising the threshold does not raise the forwarding rate") {
    double prev = std::numeric_limits<double>::infinity();
    for (double theta : {0.2, 0.5, 0.8, 1.1}) {
        double rate = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto c = small(3000);
            c.seed = seed;
            c.send_threshold = theta;
            const auto r = run_simulation(c);
            rate += double(r.stats.forwards) / double(r.stats.ticks) / 10.0;
        }
        CAPTURE(theta);
        CHECK(rate <= prev);
        prev = rate;
    }
}

TEST_CASE("an unreachable threshold deadlocks") {
    auto c = small(100);
    c.send_threshold = c.a_recency + c.b_novelty + 0.1;
    c.deadlock_ticks = 500;
    CHECK_THROWS_AS(run_simulation(c), DeadlockError);
}

TEST_CASE("default run segments into 900 full segments") {
    const auto r = run_simulation(SimConfig{});
    CHECK(r.events.size() == 90'000);
    const auto segs = ingest::segment_by_actions(r.events, kSimSegmentSize);
    CHECK(segs.size() == 900);
    CHECK_FALSE(segs.back().partial);
}

TEST_CASE("analysis table of a simulated log") {
    const auto r = run_simulation(small(2000));
    const auto s = analyze_log(r.events, "x");
    CHECK(s.rows() == 20);
    for (const auto& col : {"conductance", "expectedness", "msg_entropy", "msg_jaccard", "msg_distance"})
        CHECK(s.find(col).has_value());
}
