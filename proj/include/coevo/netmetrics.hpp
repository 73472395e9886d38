#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coevo/conductance.hpp"
#include "coevo/flagged.hpp"
#include "coevo/segment.hpp"

namespace coevo::net {

struct NetMetricRow {
    double n_nodes = 0;
    double n_edges = 0;  ///< distinct directed pairs
    double reciprocity = 0;
    double clustering = 0;
    double centralization = 0;  ///< Gini of undirected degrees
    double degree_assortativity = 0;
    double mean_degree = 0;  ///< undirected (simple projection) degree
    double sd_degree = 0;
    double lscc_size = 0;
    double lwcc_size = 0;
    double conductance = 0;
    std::optional<double> edge_jaccard;  ///< undefined for the first segment
    std::optional<double> expectedness;  ///< undefined for the first segment or an edgeless segment

    bool empty_graph = false;
    bool assortativity_degenerate = false;
    bool jaccard_degenerate = false;
};

/// Column names in CSV order.
const std::vector<std::string>& net_metric_columns();
/// Structural columns that get first-order differences in the analysis tables.
const std::vector<std::string>& standard_metric_columns();
/// Values in net_metric_columns() order; missing and degenerate-flagged values are NaN.
std::vector<double> to_values(const NetMetricRow& row);

/// Structural fields only (conductance, edge_jaccard and expectedness are left unset).
NetMetricRow standard_metrics(const ingest::SegmentGraph& graph);

/// Gini coefficient via mean absolute difference; 0 for an empty or all-zero sequence.
double gini(std::span<const double> values);

Flagged<double> edge_jaccard(const ingest::SegmentGraph& current, const ingest::SegmentGraph& previous);

/// Mean previous-segment conductance over the current segment's directed edges.
/// nullopt when `current` has no edges.
std::optional<double> expectedness(const ingest::SegmentGraph& current, const ingest::SegmentGraph& previous,
                                   const ConductanceConfig& config);

/// Probability that an edge of segment t is present again in segment t + lag, for lag = 1..max_lag.
/// Throws std::invalid_argument when max_lag is outside [1, graphs.size() - 1].
std::vector<std::pair<std::size_t, double>> edge_repeat_curve(std::span<const ingest::SegmentGraph> graphs,
                                                              std::size_t max_lag);

/// Full per-segment series: standard metrics, conductance, and the cross-segment measures.
/// Segments are processed in parallel; output order and values do not depend on the schedule.
std::vector<NetMetricRow> compute_net_series(std::span<const ingest::SegmentGraph> graphs,
                                             const ConductanceConfig& config);

}  // namespace coevo::net
