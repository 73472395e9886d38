#include "coevo/conductance.hpp"

#include <cmath>

#include "coevo/error.hpp"

namespace coevo::net {

using ingest::SegmentGraph;

void ConductanceConfig::validate() const {
    if (max_path_len < 1) throw ConfigError("max path length must be >= 1");
    if (!(prune_epsilon >= 0.0) || !std::isfinite(prune_epsilon)) throw ConfigError("prune epsilon must be finite and >= 0");
}

namespace {

// Depth-first walk over simple paths starting at a fixed source. `Visit` is called with
// (node, path probability) for every path end; it returns true if the walk should extend
// the path further.
template <class Visit>
class PathWalker {
public:
    PathWalker(const SegmentGraph& g, const ConductanceConfig& c, Visit visit)
        : g_(g), cfg_(c), visit_(visit), on_path_(g.node_count(), 0) {}

    void run(std::uint32_t source) {
        on_path_[source] = 1;
        walk(source, 1.0, 0);
        on_path_[source] = 0;
    }

private:
    void walk(std::uint32_t u, double prob, std::size_t depth) {
        const double out = g_.out_weight(u);
        for (const auto& e : g_.out_edges(u)) {
            if (on_path_[e.target]) continue;
            const double p = prob * (static_cast<double>(e.weight) / out);
            if (p < cfg_.prune_epsilon) continue;
            if (visit_(e.target, p) && depth + 1 < cfg_.max_path_len) {
                on_path_[e.target] = 1;
                walk(e.target, p, depth + 1);
                on_path_[e.target] = 0;
            }
        }
    }

    const SegmentGraph& g_;
    const ConductanceConfig& cfg_;
    Visit visit_;
    std::vector<char> on_path_;
};

}  // namespace

double pair_conductance(const SegmentGraph& g, std::uint32_t from, std::uint32_t to, const ConductanceConfig& c) {
    if (from == to || from >= g.node_count() || to >= g.node_count()) return 0.0;
    double total = 0.0;
    auto visit = [&](std::uint32_t v, double p) {
        if (v == to) {
            total += p;
            return false;  // a simple path cannot pass through its own endpoint
        }
        return true;
    };
    PathWalker<decltype(visit)>(g, c, visit).run(from);
    return total;
}

double pair_conductance(const SegmentGraph& g, std::string_view from, std::string_view to,
                        const ConductanceConfig& c) {
    const auto i = g.index_of(from);
    const auto j = g.index_of(to);
    if (!i || !j) return 0.0;
    return pair_conductance(g, *i, *j, c);
}

std::vector<double> conductance_from(const SegmentGraph& g, std::uint32_t source, const ConductanceConfig& c) {
    std::vector<double> acc(g.node_count(), 0.0);
    auto visit = [&](std::uint32_t v, double p) {
        acc[v] += p;
        return true;
    };
    PathWalker<decltype(visit)>(g, c, visit).run(source);
    return acc;
}

double graph_conductance(const SegmentGraph& g, const ConductanceConfig& c) {
    const auto n = static_cast<std::int64_t>(g.node_count());
    std::vector<double> per_source(g.node_count(), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t s = 0; s < n; ++s) {
        const auto row = conductance_from(g, static_cast<std::uint32_t>(s), c);
        double sum = 0.0;
        for (double v : row) sum += v;
        per_source[s] = sum;
    }
    double total = 0.0;
    for (double v : per_source) total += v;
    return total;
}

double graph_conductance_reference(const SegmentGraph& g, const ConductanceConfig& c) {
    const auto n = static_cast<std::uint32_t>(g.node_count());
    double total = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::uint32_t j = 0; j < n; ++j) row += pair_conductance(g, i, j, c);
        total += row;
    }
    return total;
}

}  // namespace coevo::net
