#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "coevo/segment.hpp"

namespace coevo::net {

/// Bounds on the simple-path enumeration behind cycle-free effective conductance.
struct ConductanceConfig {
    std::size_t max_path_len = 4;  ///< maximum edges per path
    double prune_epsilon = 1e-9;   ///< paths whose probability drops below this are cut

    /// Unbounded length, no pruning: the full simple-path sum.
    static ConductanceConfig exact() {
        return {std::numeric_limits<std::size_t>::max(), 0.0};
    }
    void validate() const;  // throws ConfigError
};

/// Sum over simple directed paths i -> j (length <= max_path_len) of the product of
/// transition probabilities w(k,l) / out_weight(k). Zero when either node is absent.
double pair_conductance(const ingest::SegmentGraph& graph, std::string_view from, std::string_view to,
                        const ConductanceConfig& config);
double pair_conductance(const ingest::SegmentGraph& graph, std::uint32_t from, std::uint32_t to,
                        const ConductanceConfig& config);

/// Conductance from `source` to every node (indexed like graph.nodes(); entry for source is 0),
/// computed with one bounded DFS.
std::vector<double> conductance_from(const ingest::SegmentGraph& graph, std::uint32_t source,
                                     const ConductanceConfig& config);

/// Graph conductance: sum of pair conductance over ordered pairs. One DFS per source, sources
/// distributed over OpenMP threads; the reduction runs in node order so the result does not
/// depend on the schedule.
double graph_conductance(const ingest::SegmentGraph& graph, const ConductanceConfig& config);

/// Serial reference: literal double sum of pair_conductance over all ordered pairs.
double graph_conductance_reference(const ingest::SegmentGraph& graph, const ConductanceConfig& config);

}  // namespace coevo::net
