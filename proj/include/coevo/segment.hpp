#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coevo/events.hpp"

namespace coevo::ingest {

struct Segment {
    std::size_t index = 0;
    std::vector<EventRecord> events;
    std::size_t action_count = 0;  ///< distinct doc_ids
    bool partial = false;          ///< trailing segment with fewer than segment_size actions
};

/// Splits sorted events into consecutive runs of `segment_size` distinct documents.
/// All events of a document that is already open in the current segment stay in it.
std::vector<Segment> segment_by_actions(std::span<const EventRecord> events, std::size_t segment_size);

/// Label used for events that carry no group.
inline constexpr std::string_view kDefaultGroup = "all";

/// Partitions events by group label, preserving order. Groups are returned sorted by label.
std::vector<std::pair<std::string, std::vector<EventRecord>>> split_by_group(std::span<const EventRecord> events);

/// Directed weighted interaction graph for one segment. Nodes are indexed in sorted name
/// order and edges are stored sorted by (source, target), which fixes every iteration order
/// downstream.
class SegmentGraph {
public:
    struct Edge {
        std::uint32_t source = 0;
        std::uint32_t target = 0;
        std::uint32_t weight = 0;
        bool operator==(const Edge&) const = default;
    };

    SegmentGraph() = default;

    std::size_t node_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    bool include_isolated() const noexcept { return include_isolated_; }

    const std::vector<std::string>& nodes() const noexcept { return names_; }
    const std::string& name(std::uint32_t node) const { return names_[node]; }
    std::optional<std::uint32_t> index_of(std::string_view name) const;

    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const Edge> out_edges(std::uint32_t node) const {
        return std::span<const Edge>(edges_).subspan(offsets_[node], offsets_[node + 1] - offsets_[node]);
    }
    /// Sum of out-edge weights.
    double out_weight(std::uint32_t node) const { return out_weight_[node]; }
    std::optional<std::uint32_t> weight(std::uint32_t source, std::uint32_t target) const;
    bool has_edge(std::uint32_t source, std::uint32_t target) const { return weight(source, target).has_value(); }

    /// Edge set as sorted (source name, target name) pairs.
    std::vector<std::pair<std::string, std::string>> edge_names() const;

    friend class GraphBuilder;

private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<double> out_weight_;
    bool include_isolated_ = false;
};

class GraphBuilder {
public:
    explicit GraphBuilder(bool include_isolated = true) : include_isolated_(include_isolated) {}

    void add_node(std::string name);
    /// Adds `count` interactions on (source, target). Self-loops are ignored.
    void add_interaction(const std::string& source, const std::string& target, std::uint32_t count = 1);
    SegmentGraph build() const;

private:
    bool include_isolated_;
    std::vector<std::string> extra_nodes_;
    std::vector<std::pair<std::pair<std::string, std::string>, std::uint32_t>> interactions_;
};

SegmentGraph build_segment_graph(const Segment& segment, bool include_isolated);

}  // namespace coevo::ingest
