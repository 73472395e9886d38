#include "coevo/netmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace coevo::net {

using ingest::SegmentGraph;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sorted neighbour lists of the undirected simple projection.
std::vector<std::vector<std::uint32_t>> undirected_neighbors(const SegmentGraph& g) {
    std::vector<std::vector<std::uint32_t>> nbr(g.node_count());
    for (const auto& e : g.edges()) {
        nbr[e.source].push_back(e.target);
        nbr[e.target].push_back(e.source);
    }
    for (auto& list : nbr) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return nbr;
}

std::size_t largest_wcc(const SegmentGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : g.edges()) {
        const auto a = find(e.source), b = find(e.target);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> size(n, 0);
    std::size_t best = 0;
    for (std::uint32_t v = 0; v < n; ++v) best = std::max(best, ++size[find(v)]);
    return best;
}

// Iterative Tarjan.
std::size_t largest_scc(const SegmentGraph& g) {
    const std::size_t n = g.node_count();
    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::pair<std::uint32_t, std::size_t>> call;  // (node, next out-edge offset)
    std::uint32_t counter = 0;
    std::size_t best = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, next] = call.back();
            const auto out = g.out_edges(v);
            if (next < out.size()) {
                const auto w = out[next++].target;
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const auto node = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[node]);
            if (low[node] == index[node]) {
                std::size_t size = 0;
                std::uint32_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    ++size;
                } while (w != node);
                best = std::max(best, size);
            }
        }
    }
    return best;
}

}  // namespace

const std::vector<std::string>& net_metric_columns() {
    static const std::vector<std::string> cols{
        "n_nodes",     "n_edges",   "reciprocity", "clustering",  "centralization", "degree_assortativity",
        "mean_degree", "sd_degree", "lscc_size",   "lwcc_size",   "conductance",    "edge_jaccard",
        "expectedness"};
    return cols;
}

const std::vector<std::string>& standard_metric_columns() {
    static const std::vector<std::string> cols{"n_nodes",     "n_edges",   "reciprocity", "clustering",
                                               "centralization", "degree_assortativity", "mean_degree",
                                               "sd_degree", "lscc_size", "lwcc_size"};
    return cols;
}

std::vector<double> to_values(const NetMetricRow& r) {
    // degenerate conventions are masked, never fed to the statistics as measurements
    return {r.n_nodes,
            r.n_edges,
            r.reciprocity,
            r.clustering,
            r.centralization,
            r.assortativity_degenerate ? kNaN : r.degree_assortativity,
            r.mean_degree,
            r.sd_degree,
            r.lscc_size,
            r.lwcc_size,
            r.conductance,
            r.jaccard_degenerate ? kNaN : r.edge_jaccard.value_or(kNaN),
            r.expectedness.value_or(kNaN)};
}

double gini(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (total <= 0.0) return 0.0;
    // sum_{i,j} |x_i - x_j| = 2 * sum_i (2i - n + 1) x_(i) with 0-based ascending ranks
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) weighted += (2.0 * double(i) - double(n) + 1.0) * sorted[i];
    const double mean = total / double(n);
    return 2.0 * weighted / (2.0 * double(n) * double(n) * mean);
}

NetMetricRow standard_metrics(const SegmentGraph& g) {
    NetMetricRow row;
    const std::size_t n = g.node_count();
    row.n_nodes = double(n);
    row.n_edges = double(g.edge_count());
    if (n == 0) {
        row.empty_graph = true;
        row.assortativity_degenerate = true;
        return row;
    }

    std::size_t reciprocated = 0;
    for (const auto& e : g.edges())
        if (g.has_edge(e.target, e.source)) ++reciprocated;
    row.reciprocity = g.edge_count() ? double(reciprocated) / double(g.edge_count()) : 0.0;

    const auto nbr = undirected_neighbors(g);
    std::vector<double> degree(n);
    for (std::size_t v = 0; v < n; ++v) degree[v] = double(nbr[v].size());

    // closed triangles and connected triples on the undirected projection
    double triangles = 0.0, triples = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
        const double d = degree[u];
        triples += d * (d - 1.0) / 2.0;
        for (auto v : nbr[u]) {
            if (v <= u) continue;
            // common neighbours w > v
            auto a = std::upper_bound(nbr[u].begin(), nbr[u].end(), v);
            auto b = std::upper_bound(nbr[v].begin(), nbr[v].end(), v);
            while (a != nbr[u].end() && b != nbr[v].end()) {
                if (*a < *b) ++a;
                else if (*b < *a) ++b;
                else { triangles += 1.0; ++a; ++b; }
            }
        }
    }
    row.clustering = triples > 0.0 ? 3.0 * triangles / triples : 0.0;

    row.centralization = gini(degree);

    const double mean = std::accumulate(degree.begin(), degree.end(), 0.0) / double(n);
    double var = 0.0;
    for (double d : degree) var += (d - mean) * (d - mean);
    row.mean_degree = mean;
    row.sd_degree = std::sqrt(var / double(n));

    // Pearson correlation of endpoint degrees, each undirected edge in both orientations
    double sx = 0, sxx = 0, sxy = 0, m = 0;
    for (std::uint32_t u = 0; u < n; ++u)
        for (auto v : nbr[u]) {
            sx += degree[u];
            sxx += degree[u] * degree[u];
            sxy += degree[u] * degree[v];
            m += 1.0;
        }
    if (m > 0) {
        const double mu = sx / m;
        const double cov = sxy / m - mu * mu;
        const double vx = sxx / m - mu * mu;
        if (vx > 1e-12 * std::max(1.0, mu * mu)) {
            row.degree_assortativity = std::clamp(cov / vx, -1.0, 1.0);
        } else {
            row.assortativity_degenerate = true;
        }
    } else {
        row.assortativity_degenerate = true;
    }

    row.lscc_size = double(largest_scc(g));
    row.lwcc_size = double(largest_wcc(g));
    return row;
}

Flagged<double> edge_jaccard(const SegmentGraph& current, const SegmentGraph& previous) {
    const auto a = current.edge_names();
    const auto b = previous.edge_names();
    if (a.empty() && b.empty()) return {0.0, true};
    std::size_t common = 0;
    for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else { ++common; ++i; ++j; }
    }
    return {double(common) / double(a.size() + b.size() - common), false};
}

std::optional<double> expectedness(const SegmentGraph& current, const SegmentGraph& previous,
                                   const ConductanceConfig& config) {
    if (current.edge_count() == 0) return std::nullopt;
    double total = 0.0;
    const auto edges = current.edges();
    std::size_t k = 0;
    while (k < edges.size()) {
        const auto src = edges[k].source;
        const auto prev_src = previous.index_of(current.name(src));
        std::vector<double> row;
        if (prev_src) row = conductance_from(previous, *prev_src, config);
        for (; k < edges.size() && edges[k].source == src; ++k) {
            if (!prev_src) continue;
            if (auto t = previous.index_of(current.name(edges[k].target))) total += row[*t];
        }
    }
    return total / double(edges.size());
}

std::vector<std::pair<std::size_t, double>> edge_repeat_curve(std::span<const SegmentGraph> graphs,
                                                              std::size_t max_lag) {
    if (graphs.size() < 2 || max_lag < 1 || max_lag >= graphs.size())
        throw std::invalid_argument("max_lag must be in [1, number of segments - 1]");
    std::vector<std::vector<std::pair<std::string, std::string>>> sets;
    sets.reserve(graphs.size());
    for (const auto& g : graphs) sets.push_back(g.edge_names());

    std::vector<std::pair<std::size_t, double>> curve;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double hits = 0, total = 0;
        for (std::size_t t = 0; t + lag < sets.size(); ++t) {
            const auto& a = sets[t];
            const auto& b = sets[t + lag];
            total += double(a.size());
            for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
                if (*i < *j) ++i;
                else if (*j < *i) ++j;
                else { hits += 1; ++i; ++j; }
            }
        }
        curve.emplace_back(lag, total > 0 ? hits / total : kNaN);
    }
    return curve;
}

std::vector<NetMetricRow> compute_net_series(std::span<const SegmentGraph> graphs, const ConductanceConfig& config) {
    config.validate();
    const auto n = static_cast<std::int64_t>(graphs.size());
    std::vector<NetMetricRow> rows(graphs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < n; ++t) {
        auto row = standard_metrics(graphs[t]);
        row.conductance = graph_conductance(graphs[t], config);
        if (t > 0) {
            const auto j = edge_jaccard(graphs[t], graphs[t - 1]);
            row.edge_jaccard = j.value;
            row.jaccard_degenerate = j.degenerate;
            row.expectedness = expectedness(graphs[t], graphs[t - 1], config);
        }
        rows[t] = std::move(row);
    }
    return rows;
}

}  // namespace coevo::net
