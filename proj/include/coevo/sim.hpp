#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "coevo/error.hpp"
#include "coevo/events.hpp"
#include "coevo/messages.hpp"
#include "coevo/stats/correlation.hpp"
#include "coevo/stats/series.hpp"

namespace coevo::sim {

struct SimConfig {
    // network
    std::size_t n_nodes = 100;
    std::size_t n_edges = 1000;
    double target_reciprocity = 0.5;
    double target_clustering = 0.3;
    double structure_tolerance = 0.02;
    std::size_t max_structure_iters = 1'000'000;

    // message values: rounded Gaussian clamped to [1, 100]
    double value_mean = 50.5;
    double value_sd = 15.0;

    // topics
    bool topic_enabled = false;
    double topic_mean_lifetime = 500.0;  ///< in emitted messages

    // forwarding policy
    double a_recency = 1.0;
    double b_novelty = 1.0;
    double c_topicality = 10.0;
    double recency_tau = 2.0;           ///< ticks
    std::size_t novelty_window = 3;     ///< most recent queue entries compared against
    bool novelty_normalized = true;     ///< divide the mean absolute difference by 99
    std::size_t queue_capacity = 64;    ///< entries kept per node
    double send_threshold = 1.1;
    /// Per-edge transmission probability: w / weighted out-degree (random-walk transition,
    /// one expected transmission per send) when true, raw w when false.
    bool normalized_transmission = true;
    double transmission_gain = 1.0;  ///< multiplies the normalized probability (capped at 1)
    double p_new = 1.0;  ///< per-tick probability of an exogenous message

    std::size_t total_messages = 90'000;
    std::size_t deadlock_ticks = 100'000;
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

void to_json(nlohmann::json& j, const SimConfig& c);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, SimConfig& c);

// ---------------------------------------------------------------------------
// Network

struct WeightedEdge {
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    double weight = 0.0;  ///< Uniform(0,1) interaction strength
};

struct Network {
    std::size_t n_nodes = 0;
    std::vector<WeightedEdge> edges;  ///< sorted by (source, target)
    std::vector<std::size_t> offsets;
    double reciprocity = 0.0;
    double clustering = 0.0;
    std::size_t iterations = 0;
    bool infeasible = false;  ///< saturated graph whose structure cannot match the targets

    std::span<const WeightedEdge> out_edges(std::uint32_t node) const {
        return std::span<const WeightedEdge>(edges).subspan(offsets[node], offsets[node + 1] - offsets[node]);
    }
};

/// Raised when the structure search cannot reach the targets.
class StructureError : public NumericalError {
public:
    StructureError(const std::string& what, double reciprocity, double clustering)
        : NumericalError(what), best_reciprocity(reciprocity), best_clustering(clustering) {}
    double best_reciprocity;
    double best_clustering;
};

/// Random directed graph with exactly n_edges edges, hill-climbed toward the reciprocity and
/// clustering targets. Edge weights are Uniform(0,1).
Network generate_network(const SimConfig& config, std::uint64_t seed);

/// Fixed-width node label ("n007").
std::string node_name(std::uint32_t node, std::size_t n_nodes);

// ---------------------------------------------------------------------------
// Topics and policy

struct Topic {
    int value = 0;
    std::size_t lifetime = 0;  ///< messages
};

/// I.i.d. topics in [1,100] with Poisson lifetimes (zeros redrawn) covering total_messages.
/// Empty when topics are disabled.
std::vector<Topic> topic_schedule(const SimConfig& config, std::uint64_t seed);

struct QueueEntry {
    std::uint32_t message = 0;
    std::int64_t received = 0;
    double value = 0.0;
    bool sent = false;
    bool expired = false;  ///< can no longer clear the threshold
};

struct NodeState {
    std::deque<QueueEntry> queue;  ///< ordered by receipt
    std::unordered_set<std::uint32_t> seen;

    /// Appends a new message unless it was seen before; trims to `capacity`.
    bool receive(std::uint32_t message, double value, std::int64_t tick, std::size_t capacity);
};

struct ForwardDecision {
    double score = 0.0;
    double recency = 0.0;
    double novelty = 0.0;
    double penalty = 0.0;
    bool send = false;
};

/// score = a * recency + b * novelty - c * penalty, send when score > threshold.
/// Novelty compares `candidate` with the last novelty_window queue entries other than itself.
ForwardDecision forward_score(const NodeState& state, const QueueEntry& candidate, std::optional<double> topic,
                              std::int64_t tick, const SimConfig& config);

// ---------------------------------------------------------------------------
// Simulation

struct SimStats {
    std::int64_t ticks = 0;
    std::size_t injected = 0;
    std::size_t received = 0;  ///< first receipts (duplicates ignored)
    std::size_t forwards = 0;  ///< send decisions
    std::size_t topics_used = 0;
};

struct SimResult {
    Network network;
    std::vector<Topic> topics;
    std::vector<ingest::EventRecord> events;
    SimStats stats;
};

/// Raised when no message moves for deadlock_ticks consecutive ticks.
class DeadlockError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Tick loop: exogenous injection, then every node evaluates its unsent entries and forwards
/// each send along every out-edge independently, with the per-edge probability set by
/// normalized_transmission. Stops after exactly total_messages
/// records. Structure/topic and traffic randomness use independent streams derived from seed.
SimResult run_simulation(const SimConfig& config);

// ---------------------------------------------------------------------------
// With/without topicality comparison

struct ConditionSummary {
    double mean_entropy = 0.0;
    double mean_sd = 0.0;
    double mean_jaccard = 0.0;
    double mean_distance = 0.0;
    double corr_jaccard_entropy = 0.0;  ///< Fisher-averaged Spearman rho over seeds
    std::vector<double> seed_entropy, seed_sd, seed_jaccard, seed_distance, seed_corr_jaccard_entropy;
    stats::CorrelationReport correlations;  ///< structure/content pairs over seeds
};

struct ComparisonReport {
    SimConfig config;
    std::vector<std::uint64_t> seeds;
    ConditionSummary without_topic;
    ConditionSummary with_topic;
    std::vector<stats::MetricSeries> series;  ///< group label "<condition>/seed<k>"
};

/// Segment size used by the comparison (messages per segment).
inline constexpr std::size_t kSimSegmentSize = 100;

/// Structure/content pairs reported for each condition.
std::vector<std::pair<std::string, std::string>> comparison_pairs();

/// Simulated log to analysis table: segments of kSimSegmentSize messages, network metrics with
/// default conductance bounds, numeric content metrics.
stats::MetricSeries analyze_log(const std::vector<ingest::EventRecord>& events, const std::string& group);

/// Paired runs (same seeds with and without topics) and their summary statistics.
ComparisonReport compare_topicality(const SimConfig& config, std::size_t n_seeds);

nlohmann::json to_json(const ComparisonReport& report);

}  // namespace coevo::sim
