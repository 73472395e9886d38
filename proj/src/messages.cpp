#include "coevo/messages.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace coevo::sim {

std::optional<double> message_distance(std::span<const double> current, std::span<const double> previous,
                                       DistanceMode mode) {
    if (current.empty() || previous.empty()) return std::nullopt;
    double sum = 0.0;
    for (double a : current) {
        double row = 0.0;
        for (double b : previous) row += std::abs(a - b);
        sum += row;
    }
    if (mode == DistanceMode::CrossPairSum) return sum;
    return sum / (double(current.size()) * double(previous.size()));
}

double message_entropy(std::span<const double> values) {
    if (values.empty()) return 0.0;
    std::map<long long, std::size_t> counts;
    for (double v : values) ++counts[std::llround(v)];
    const double n = double(values.size());
    double h = 0.0;
    for (const auto& [value, c] : counts) {
        const double p = double(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double message_sd(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / double(values.size()));
}

std::optional<double> message_jaccard(std::span<const double> current, std::span<const double> previous) {
    std::set<long long> a, b;
    for (double v : current) a.insert(std::llround(v));
    for (double v : previous) b.insert(std::llround(v));
    if (a.empty() && b.empty()) return std::nullopt;
    std::size_t common = 0;
    for (auto v : a) common += b.count(v);
    return double(common) / double(a.size() + b.size() - common);
}

}  // namespace coevo::sim
