#include "coevo/segment.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "coevo/error.hpp"

namespace coevo::ingest {

std::vector<Segment> segment_by_actions(std::span<const EventRecord> events, std::size_t segment_size) {
    if (segment_size == 0) throw ConfigError("segment size must be >= 1");
    std::vector<Segment> segments;
    if (events.empty()) return segments;

    std::unordered_set<std::string> open_docs;
    Segment current;
    for (const auto& e : events) {
        if (!open_docs.contains(e.doc_id)) {
            if (open_docs.size() == segment_size) {
                current.action_count = open_docs.size();
                segments.push_back(std::move(current));
                current = Segment{};
                current.index = segments.size();
                open_docs.clear();
            }
            open_docs.insert(e.doc_id);
        }
        current.events.push_back(e);
    }
    current.action_count = open_docs.size();
    current.partial = current.action_count < segment_size;
    segments.push_back(std::move(current));
    return segments;
}

std::vector<std::pair<std::string, std::vector<EventRecord>>> split_by_group(std::span<const EventRecord> events) {
    std::map<std::string, std::vector<EventRecord>> groups;
    for (const auto& e : events) groups[e.group.value_or(std::string(kDefaultGroup))].push_back(e);
    return {std::make_move_iterator(groups.begin()), std::make_move_iterator(groups.end())};
}

std::optional<std::uint32_t> SegmentGraph::index_of(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return static_cast<std::uint32_t>(it - names_.begin());
}

std::optional<std::uint32_t> SegmentGraph::weight(std::uint32_t source, std::uint32_t target) const {
    auto out = out_edges(source);
    auto it = std::lower_bound(out.begin(), out.end(), target,
                               [](const Edge& e, std::uint32_t t) { return e.target < t; });
    if (it == out.end() || it->target != target) return std::nullopt;
    return it->weight;
}

std::vector<std::pair<std::string, std::string>> SegmentGraph::edge_names() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.emplace_back(names_[e.source], names_[e.target]);
    return out;  // sorted because names_ is sorted and edges_ is ordered by index
}

void GraphBuilder::add_node(std::string name) { extra_nodes_.push_back(std::move(name)); }

void GraphBuilder::add_interaction(const std::string& source, const std::string& target, std::uint32_t count) {
    if (source == target || count == 0) return;
    interactions_.push_back({{source, target}, count});
}

SegmentGraph GraphBuilder::build() const {
    SegmentGraph g;
    g.include_isolated_ = include_isolated_;

    std::map<std::pair<std::string, std::string>, std::uint32_t> weights;
    for (const auto& [key, count] : interactions_) weights[key] += count;

    std::vector<std::string> names;
    if (include_isolated_) names = extra_nodes_;
    for (const auto& [key, w] : weights) {
        names.push_back(key.first);
        names.push_back(key.second);
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    g.names_ = std::move(names);

    g.edges_.reserve(weights.size());
    for (const auto& [key, w] : weights)
        g.edges_.push_back({*g.index_of(key.first), *g.index_of(key.second), w});
    // map order on names equals index order, so edges_ is already sorted by (source, target)

    const std::size_t n = g.names_.size();
    g.offsets_.assign(n + 1, 0);
    g.out_weight_.assign(n, 0.0);
    for (const auto& e : g.edges_) {
        ++g.offsets_[e.source + 1];
        g.out_weight_[e.source] += e.weight;
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    return g;
}

SegmentGraph build_segment_graph(const Segment& segment, bool include_isolated) {
    GraphBuilder builder(include_isolated);
    for (const auto& e : segment.events) {
        if (include_isolated) builder.add_node(e.actor);
        for (const auto& t : e.targets) builder.add_interaction(e.actor, t);
    }
    return builder.build();
}

}  // namespace coevo::ingest
