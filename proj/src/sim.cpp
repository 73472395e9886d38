#include "coevo/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>

#include "coevo/content.hpp"
#include "coevo/netmetrics.hpp"
#include "coevo/segment.hpp"

namespace coevo::sim {

namespace {

constexpr double kValueRange = 99.0;

// Independent streams derived from the run seed.
enum class Stream : std::uint64_t { Structure = 0, Topics = 1, Traffic = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

double draw_value(std::mt19937_64& rng, const SimConfig& c) {
    std::normal_distribution<double> normal(c.value_mean, c.value_sd);
    return std::clamp(std::round(normal(rng)), 1.0, 100.0);
}

}  // namespace

void SimConfig::validate() const {
    require(n_nodes >= 2, "n_nodes must be at least 2");
    require(n_edges >= 1, "n_edges must be at least 1");
    require(n_edges <= n_nodes * (n_nodes - 1), "n_edges exceeds n_nodes * (n_nodes - 1)");
    require(target_reciprocity >= 0 && target_reciprocity <= 1, "target_reciprocity must lie in [0, 1]");
    require(target_clustering >= 0 && target_clustering <= 1, "target_clustering must lie in [0, 1]");
    require(structure_tolerance >= 0, "structure_tolerance must be non-negative");
    require(max_structure_iters >= 1, "max_structure_iters must be positive");
    require(std::isfinite(value_mean) && value_sd >= 0, "value distribution needs a finite mean and sd >= 0");
    require(topic_mean_lifetime > 0, "topic_mean_lifetime must be positive");
    require(a_recency >= 0 && b_novelty >= 0 && c_topicality >= 0, "policy weights must be non-negative");
    require(recency_tau > 0, "recency_tau must be positive");
    require(novelty_window >= 1, "novelty_window must be at least 1");
    require(queue_capacity >= novelty_window + 1, "queue_capacity must exceed novelty_window");
    require(std::isfinite(send_threshold), "send_threshold must be finite");
    require(p_new > 0 && p_new <= 1, "p_new must lie in (0, 1]");
    require(total_messages >= 1, "total_messages must be at least 1");
    require(deadlock_ticks >= 1, "deadlock_ticks must be positive");
}

#define COEVO_SIM_FIELDS(X)                                                                                \
    X(n_nodes) X(n_edges) X(target_reciprocity) X(target_clustering) X(structure_tolerance)             \
    X(max_structure_iters) X(value_mean) X(value_sd) X(topic_enabled) X(topic_mean_lifetime) X(a_recency) \
    X(b_novelty) X(c_topicality) X(recency_tau) X(novelty_window) X(novelty_normalized) X(queue_capacity) \
    X(send_threshold) X(normalized_transmission) X(transmission_gain) X(p_new) X(total_messages) X(deadlock_ticks) X(seed)

void to_json(nlohmann::json& j, const SimConfig& c) {
    j = nlohmann::json::object();
#define X(f) j[#f] = c.f;
    COEVO_SIM_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, SimConfig& c) {
    if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
    static const std::set<std::string> known = {
#define X(f) #f,
        COEVO_SIM_FIELDS(X)
#undef X
    };
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown simulation option: " + key);
    try {
#define X(f) \
    if (j.contains(#f)) j.at(#f).get_to(c.f);
        COEVO_SIM_FIELDS(X)
#undef X
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid simulation option: ") + e.what());
    }
}

#undef COEVO_SIM_FIELDS

std::string node_name(std::uint32_t node, std::size_t n_nodes) {
    std::size_t width = 1;
    for (std::size_t v = n_nodes > 0 ? n_nodes - 1 : 0; v >= 10; v /= 10) ++width;
    return fmt::format("n{:0{}}", node, std::max<std::size_t>(width, 3));
}

// ---------------------------------------------------------------------------
// Network generation

namespace {

/// Directed edge set with incremental reciprocity and undirected-triangle bookkeeping.
class StructureState {
public:
    explicit StructureState(std::size_t n)
        : n_(n), words_((n + 63) / 64), directed_(n * n, 0), position_(n * n, -1), undirected_(n * words_, 0),
          degree_(n, 0) {}

    std::size_t edges() const { return list_.size(); }
    bool has(std::uint32_t u, std::uint32_t v) const { return directed_[u * n_ + v] != 0; }
    bool adjacent(std::uint32_t u, std::uint32_t v) const {
        return (undirected_[u * words_ + v / 64] >> (v % 64)) & 1u;
    }
    std::pair<std::uint32_t, std::uint32_t> edge(std::size_t i) const { return list_[i]; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edge_list() const { return list_; }
    std::size_t degree(std::uint32_t u) const { return degree_[u]; }

    /// k-th undirected neighbour of u in index order.
    std::uint32_t neighbour(std::uint32_t u, std::size_t k) const {
        const std::uint64_t* row = &undirected_[u * words_];
        for (std::size_t w = 0; w < words_; ++w) {
            const auto c = static_cast<std::size_t>(std::popcount(row[w]));
            if (k < c) {
                std::uint64_t bits = row[w];
                for (std::size_t s = 0; s < k; ++s) bits &= bits - 1;
                return static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits));
            }
            k -= c;
        }
        return 0;
    }

    double reciprocity() const { return list_.empty() ? 0.0 : 2.0 * mutual_ / static_cast<double>(list_.size()); }
    double clustering() const { return triples_ == 0 ? 0.0 : 3.0 * triangles_ / static_cast<double>(triples_); }

    void add(std::uint32_t u, std::uint32_t v) {
        directed_[u * n_ + v] = 1;
        position_[u * n_ + v] = static_cast<std::int64_t>(list_.size());
        list_.emplace_back(u, v);
        if (has(v, u)) {
            ++mutual_;
        } else {
            triangles_ += common(u, v);
            triples_ += degree_[u] + degree_[v];
            ++degree_[u];
            ++degree_[v];
            set_adjacent(u, v, true);
        }
    }

    void remove(std::uint32_t u, std::uint32_t v) {
        const auto pos = static_cast<std::size_t>(position_[u * n_ + v]);
        const auto last = list_.back();
        list_[pos] = last;
        position_[last.first * n_ + last.second] = static_cast<std::int64_t>(pos);
        list_.pop_back();
        position_[u * n_ + v] = -1;
        directed_[u * n_ + v] = 0;
        if (has(v, u)) {
            --mutual_;
        } else {
            set_adjacent(u, v, false);
            --degree_[u];
            --degree_[v];
            triples_ -= degree_[u] + degree_[v];
            triangles_ -= common(u, v);
        }
    }

private:
    std::size_t common(std::uint32_t u, std::uint32_t v) const {
        std::size_t c = 0;
        for (std::size_t w = 0; w < words_; ++w)
            c += static_cast<std::size_t>(std::popcount(undirected_[u * words_ + w] & undirected_[v * words_ + w]));
        return c;
    }
    void set_adjacent(std::uint32_t u, std::uint32_t v, bool on) {
        auto flip = [&](std::uint32_t a, std::uint32_t b) {
            auto& word = undirected_[a * words_ + b / 64];
            const std::uint64_t bit = std::uint64_t{1} << (b % 64);
            word = on ? (word | bit) : (word & ~bit);
        };
        flip(u, v);
        flip(v, u);
    }

    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint8_t> directed_;
    std::vector<std::int64_t> position_;
    std::vector<std::uint64_t> undirected_;
    std::vector<std::size_t> degree_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> list_;
    std::size_t mutual_ = 0;  // unordered pairs with both directions
    std::size_t triangles_ = 0;
    std::size_t triples_ = 0;
};

constexpr int kMoveAttempts = 32;

std::optional<std::pair<std::uint32_t, std::uint32_t>> propose_reciprocal(const StructureState& s,
                                                                         std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, s.edges() - 1);
    for (int attempt = 0; attempt < kMoveAttempts; ++attempt) {
        const auto [u, v] = s.edge(pick(rng));
        if (!s.has(v, u)) return std::make_pair(v, u);
    }
    return std::nullopt;
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> propose_triangle(const StructureState& s, std::size_t n,
                                                                       std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
    for (int attempt = 0; attempt < kMoveAttempts; ++attempt) {
        const auto v = node(rng);
        const auto d = s.degree(v);
        if (d < 2) continue;
        std::uniform_int_distribution<std::size_t> pick(0, d - 1);
        const auto i = pick(rng);
        auto j = pick(rng);
        if (i == j) continue;
        const auto x = s.neighbour(v, i);
        const auto y = s.neighbour(v, j);
        if (s.adjacent(x, y)) continue;
        return std::make_pair(x, y);
    }
    return std::nullopt;
}

double distance_to_targets(const StructureState& s, const SimConfig& c) {
    return std::abs(s.reciprocity() - c.target_reciprocity) + std::abs(s.clustering() - c.target_clustering);
}

bool within_tolerance(const StructureState& s, const SimConfig& c) {
    return std::abs(s.reciprocity() - c.target_reciprocity) <= c.structure_tolerance &&
           std::abs(s.clustering() - c.target_clustering) <= c.structure_tolerance;
}

}  // namespace

Network generate_network(const SimConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t n = config.n_nodes;
    const std::size_t m = config.n_edges;
    auto rng = make_rng(seed, Stream::Structure);
    StructureState state(n);

    Network net;
    net.n_nodes = n;

    if (m == n * (n - 1)) {
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = 0; v < n; ++v)
                if (u != v) state.add(u, v);
        net.infeasible = !within_tolerance(state, config);
    } else {
        // Uniform random digraph with exactly m edges.
        std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
        while (state.edges() < m) {
            const auto u = node(rng);
            const auto v = node(rng);
            if (u != v && !state.has(u, v)) state.add(u, v);
        }

        // Hill-climb: swap a random edge for a reciprocal or triangle-closing one; keep moves
        // that do not increase the L1 distance to the targets.
        std::bernoulli_distribution coin(0.5);
        std::uniform_int_distribution<std::size_t> pick_edge(0, m - 1);
        double dist = distance_to_targets(state, config);
        std::size_t it = 0;
        for (; it < config.max_structure_iters && !within_tolerance(state, config); ++it) {
            const bool reciprocal_move = coin(rng);
            const auto proposal = reciprocal_move ? propose_reciprocal(state, rng) : propose_triangle(state, n, rng);
            if (!proposal) continue;
            auto [x, y] = *proposal;
            if (!reciprocal_move && coin(rng)) std::swap(x, y);
            if (state.has(x, y)) continue;
            const auto [ru, rv] = state.edge(pick_edge(rng));
            state.remove(ru, rv);
            state.add(x, y);
            const double next = distance_to_targets(state, config);
            if (next > dist) {
                state.remove(x, y);
                state.add(ru, rv);
            } else {
                dist = next;
            }
        }
        net.iterations = it;
        if (!within_tolerance(state, config))
            throw StructureError(fmt::format("structure targets (reciprocity {}, clustering {}) not reached after {} "
                                             "iterations; best reciprocity {:.4f}, clustering {:.4f}",
                                             config.target_reciprocity, config.target_clustering, it,
                                             state.reciprocity(), state.clustering()),
                                 state.reciprocity(), state.clustering());
    }

    net.reciprocity = state.reciprocity();
    net.clustering = state.clustering();
    auto list = state.edge_list();
    std::sort(list.begin(), list.end());
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    net.edges.reserve(list.size());
    for (const auto& [u, v] : list) net.edges.push_back({u, v, weight(rng)});
    net.offsets.assign(n + 1, 0);
    for (const auto& e : net.edges) ++net.offsets[e.source + 1];
    for (std::size_t i = 0; i < n; ++i) net.offsets[i + 1] += net.offsets[i];
    return net;
}

// ---------------------------------------------------------------------------
// Topics and policy

std::vector<Topic> topic_schedule(const SimConfig& config, std::uint64_t seed) {
    std::vector<Topic> topics;
    if (!config.topic_enabled) return topics;
    auto rng = make_rng(seed, Stream::Topics);
    std::uniform_int_distribution<int> value(1, 100);
    std::poisson_distribution<std::size_t> lifetime(config.topic_mean_lifetime);
    std::size_t covered = 0;
    while (covered < config.total_messages) {
        Topic t;
        t.value = value(rng);
        do t.lifetime = lifetime(rng);
        while (t.lifetime == 0);
        covered += t.lifetime;
        topics.push_back(t);
    }
    return topics;
}

bool NodeState::receive(std::uint32_t message, double value, std::int64_t tick, std::size_t capacity) {
    if (!seen.insert(message).second) return false;
    queue.push_back({message, tick, value, false, false});
    while (queue.size() > capacity) queue.pop_front();
    return true;
}

ForwardDecision forward_score(const NodeState& state, const QueueEntry& candidate, std::optional<double> topic,
                              std::int64_t tick, const SimConfig& config) {
    ForwardDecision d;
    d.recency = std::exp(-static_cast<double>(tick - candidate.received) / config.recency_tau);

    double total = 0.0;
    std::size_t count = 0;
    for (auto it = state.queue.rbegin(); it != state.queue.rend() && count < config.novelty_window; ++it) {
        if (it->message == candidate.message) continue;
        total += std::abs(candidate.value - it->value);
        ++count;
    }
    const double scale = config.novelty_normalized ? kValueRange : 1.0;
    d.novelty = count == 0 ? kValueRange / scale : total / static_cast<double>(count) / scale;
    d.penalty = topic ? std::abs(candidate.value - *topic) / scale : 0.0;
    d.score = config.a_recency * d.recency + config.b_novelty * d.novelty - config.c_topicality * d.penalty;
    d.send = d.score > config.send_threshold;
    return d;
}

// ---------------------------------------------------------------------------
// Simulation

SimResult run_simulation(const SimConfig& config) {
    config.validate();
    SimResult result;
    result.network = generate_network(config, config.seed);
    result.topics = topic_schedule(config, config.seed);
    const auto& net = result.network;
    const std::size_t n = net.n_nodes;

    std::vector<double> transmit(net.edges.size());
    for (std::uint32_t u = 0; u < n; ++u) {
        double out = 0.0;
        for (const auto& e : net.out_edges(u)) out += e.weight;
        for (std::size_t i = net.offsets[u]; i < net.offsets[u + 1]; ++i)
            transmit[i] = config.normalized_transmission ? (out > 0 ? std::min(1.0, config.transmission_gain * net.edges[i].weight / out) : 0.0)
                                                         : net.edges[i].weight;
    }

    std::vector<std::string> names(n);
    for (std::uint32_t u = 0; u < n; ++u) names[u] = node_name(u, n);

    auto rng = make_rng(config.seed, Stream::Traffic);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> any_node(0, static_cast<std::uint32_t>(n - 1));

    // Best future score an entry can reach; below the threshold it is retired.
    const double novelty_max = config.novelty_normalized ? 1.0 : kValueRange;
    auto hopeless = [&](const QueueEntry& e, std::int64_t tick) {
        return config.a_recency * std::exp(-static_cast<double>(tick - e.received) / config.recency_tau) +
                   config.b_novelty * novelty_max <=
               config.send_threshold;
    };

    struct Delivery {
        std::uint32_t node;
        std::uint32_t message;
        double value;
    };
    std::vector<NodeState> nodes(n);
    // A score can only decay while the queue and topic stay unchanged, so a node is only
    // re-evaluated after a receipt or a topic switch.
    std::vector<std::uint8_t> dirty(n, 0);
    std::vector<Delivery> pending;
    std::uint32_t next_message = 0;

    std::size_t topic_index = 0;
    std::size_t topic_end = result.topics.empty() ? 0 : result.topics[0].lifetime;

    auto& events = result.events;
    events.reserve(config.total_messages);
    auto deliver = [&](const Delivery& d, std::int64_t tick) {
        if (nodes[d.node].receive(d.message, d.value, tick, config.queue_capacity)) {
            ++result.stats.received;
            dirty[d.node] = 1;
        }
    };

    std::int64_t idle = 0;
    std::int64_t tick = 0;
    for (;; ++tick) {
        for (const auto& d : pending) deliver(d, tick);
        pending.clear();

        if (unit(rng) < config.p_new) {
            const auto node = any_node(rng);
            const double value = draw_value(rng, config);
            deliver({node, next_message++, value}, tick);
            ++result.stats.injected;
        }

        bool transmitted = false;
        for (std::uint32_t u = 0; u < n; ++u) {
            if (!dirty[u]) continue;
            dirty[u] = 0;
            auto& state = nodes[u];
            for (auto& entry : state.queue) {
                if (entry.sent || entry.expired) continue;
                if (hopeless(entry, tick)) {
                    entry.expired = true;
                    continue;
                }
                std::optional<double> topic;
                if (!result.topics.empty()) topic = result.topics[topic_index].value;
                const auto decision = forward_score(state, entry, topic, tick, config);
                if (!decision.send) continue;
                entry.sent = true;
                ++result.stats.forwards;
                for (std::size_t i = net.offsets[u]; i < net.offsets[u + 1]; ++i) {
                    const auto& edge = net.edges[i];
                    if (unit(rng) >= transmit[i]) continue;
                    ingest::EventRecord rec;
                    rec.timestamp = tick;
                    rec.actor = names[u];
                    rec.targets = {names[edge.target]};
                    rec.doc_id = fmt::format("m{}", events.size());
                    rec.payload = ingest::NumericMessage{entry.value};
                    events.push_back(std::move(rec));
                    pending.push_back({edge.target, entry.message, entry.value});
                    transmitted = true;
                    if (events.size() == config.total_messages) {
                        result.stats.ticks = tick + 1;
                        result.stats.topics_used = result.topics.empty() ? 0 : topic_index + 1;
                        return result;
                    }
                    if (!result.topics.empty() && events.size() >= topic_end &&
                        topic_index + 1 < result.topics.size()) {
                        topic_end += result.topics[++topic_index].lifetime;
                        std::fill(dirty.begin(), dirty.end(), 1);
                    }
                }
            }
        }

        idle = transmitted ? 0 : idle + 1;
        if (idle >= static_cast<std::int64_t>(config.deadlock_ticks))
            throw DeadlockError(fmt::format("no message transmitted for {} consecutive ticks (tick {}, {} records); "
                                            "lower send_threshold (currently {})",
                                            config.deadlock_ticks, tick, events.size(), config.send_threshold));
    }
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<std::pair<std::string, std::string>> comparison_pairs() {
    return {{"conductance", "msg_entropy"},
            {"expectedness", "msg_distance"},
            {"expectedness", "msg_jaccard"},
            {"msg_jaccard", "msg_entropy"}};
}

stats::MetricSeries analyze_log(const std::vector<ingest::EventRecord>& events, const std::string& group) {
    auto segments = ingest::segment_by_actions(events, kSimSegmentSize);
    if (!segments.empty() && segments.back().partial) segments.pop_back();
    std::vector<ingest::SegmentGraph> graphs;
    graphs.reserve(segments.size());
    for (const auto& s : segments) graphs.push_back(ingest::build_segment_graph(s, false));

    const auto net_rows = net::compute_net_series(graphs, net::ConductanceConfig{});
    const auto content = content::compute_content_series(segments, graphs, ingest::PayloadKind::Numeric,
                                                         content::DocumentFrequencies{}, content::ContentOptions{});
    stats::MetricSeries series;
    series.group = group;
    for (const auto& s : segments) series.segments.push_back(s.index);
    const auto& net_cols = net::net_metric_columns();
    std::vector<std::vector<double>> columns(net_cols.size() + content.columns.size(),
                                             std::vector<double>(segments.size()));
    for (std::size_t t = 0; t < segments.size(); ++t) {
        const auto values = net::to_values(net_rows[t]);
        for (std::size_t c = 0; c < net_cols.size(); ++c) columns[c][t] = values[c];
        for (std::size_t c = 0; c < content.columns.size(); ++c)
            columns[net_cols.size() + c][t] = content.rows[t][c];
    }
    for (std::size_t c = 0; c < net_cols.size(); ++c) series.add_column(net_cols[c], std::move(columns[c]));
    for (std::size_t c = 0; c < content.columns.size(); ++c)
        series.add_column(content.columns[c], std::move(columns[net_cols.size() + c]));
    return series;
}

namespace {

double mean_of(std::span<const double> values) {
    const auto v = stats::complete(values);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

ConditionSummary summarize(std::span<const stats::MetricSeries> runs) {
    ConditionSummary s;
    for (const auto& r : runs) {
        s.seed_entropy.push_back(mean_of(r.column("msg_entropy")));
        s.seed_sd.push_back(mean_of(r.column("msg_sd")));
        s.seed_jaccard.push_back(mean_of(r.column("msg_jaccard")));
        s.seed_distance.push_back(mean_of(r.column("msg_distance")));
        s.seed_corr_jaccard_entropy.push_back(stats::spearman(r.column("msg_jaccard"), r.column("msg_entropy")).rho);
    }
    s.mean_entropy = mean_of(s.seed_entropy);
    s.mean_sd = mean_of(s.seed_sd);
    s.mean_jaccard = mean_of(s.seed_jaccard);
    s.mean_distance = mean_of(s.seed_distance);
    s.corr_jaccard_entropy = stats::fisher_z_mean(s.seed_corr_jaccard_entropy);
    const auto pairs = comparison_pairs();
    s.correlations = stats::correlate_groups(runs, pairs, stats::CorrelateOptions{});
    return s;
}

}  // namespace

ComparisonReport compare_topicality(const SimConfig& config, std::size_t n_seeds) {
    if (n_seeds == 0) throw ConfigError("compare needs at least one seed");
    config.validate();
    ComparisonReport report;
    report.config = config;
    std::vector<stats::MetricSeries> without, with;
    for (std::size_t k = 0; k < n_seeds; ++k) {
        const std::uint64_t seed = config.seed + k;
        report.seeds.push_back(seed);
        for (bool topic : {false, true}) {
            SimConfig c = config;
            c.seed = seed;
            c.topic_enabled = topic;
            const auto run = run_simulation(c);
            auto series = analyze_log(run.events, fmt::format("{}/seed{}", topic ? "topic" : "no_topic", seed));
            (topic ? with : without).push_back(std::move(series));
        }
    }
    report.without_topic = summarize(without);
    report.with_topic = summarize(with);
    report.series = std::move(without);
    report.series.insert(report.series.end(), std::make_move_iterator(with.begin()),
                         std::make_move_iterator(with.end()));
    return report;
}

namespace {

nlohmann::json to_json(const ConditionSummary& s) {
    nlohmann::json j;
    j["mean_entropy"] = s.mean_entropy;
    j["mean_sd"] = s.mean_sd;
    j["mean_jaccard"] = s.mean_jaccard;
    j["mean_distance"] = s.mean_distance;
    j["corr_jaccard_entropy"] = s.corr_jaccard_entropy;
    j["seed_entropy"] = s.seed_entropy;
    j["seed_sd"] = s.seed_sd;
    j["seed_jaccard"] = s.seed_jaccard;
    j["seed_distance"] = s.seed_distance;
    j["seed_corr_jaccard_entropy"] = s.seed_corr_jaccard_entropy;
    auto& pairs = j["correlations"] = nlohmann::json::array();
    for (const auto& p : s.correlations.pairs)
        pairs.push_back({{"var_a", p.var_a},
                         {"var_b", p.var_b},
                         {"mean_rho", p.mean_rho},
                         {"combined_p", p.combined_p},
                         {"stars", p.stars},
                         {"n_groups", p.groups.size()}});
    auto& excluded = j["excluded_groups"] = nlohmann::json::array();
    for (const auto& [g, why] : s.correlations.excluded_groups) excluded.push_back({{"group", g}, {"reason", why}});
    return j;
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& report) {
    nlohmann::json j;
    j["config"] = report.config;
    j["seeds"] = report.seeds;
    j["without_topic"] = to_json(report.without_topic);
    j["with_topic"] = to_json(report.with_topic);
    return j;
}

}  // namespace coevo::sim
