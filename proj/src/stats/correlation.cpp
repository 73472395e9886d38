#include "coevo/stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "coevo/error.hpp"
#include "coevo/stats/stationarity.hpp"

namespace coevo::stats {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    std::vector<double> a, b;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        a.push_back(x[i]);
        b.push_back(y[i]);
    }
    SpearmanResult r;
    r.n = a.size();
    if (r.n < 3) throw std::invalid_argument("spearman needs at least 3 complete pairs");

    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = double(r.n);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < r.n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        r.degenerate = true;
        return r;
    }
    r.rho = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    if (std::abs(r.rho) >= 1.0 - 1e-15) {
        r.p = 0.0;
        return r;
    }
    const double df = n - 2.0;
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    boost::math::students_t dist(df);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return r;
}

std::string_view stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.1) return "*";
    return "";
}

double fisher_z_mean(std::span<const double> rhos) {
    if (rhos.empty()) throw std::invalid_argument("fisher_z_mean of nothing");
    if (std::all_of(rhos.begin(), rhos.end(), [&](double r) { return r == rhos.front(); })) return rhos.front();
    constexpr double kLimit = 1.0 - 1e-12;
    double z = 0.0;
    for (double r : rhos) z += std::atanh(std::clamp(r, -kLimit, kLimit));
    return std::tanh(z / double(rhos.size()));
}

double stouffer_combined_p(std::span<const double> p_values, std::span<const double> rhos) {
    if (p_values.empty() || p_values.size() != rhos.size()) throw std::invalid_argument("stouffer: bad input");
    const boost::math::normal std_normal;
    double sum = 0.0;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        const double half = std::clamp(p_values[i] / 2.0, 1e-300, 0.5);
        const double z = -boost::math::quantile(std_normal, half);  // upper-tail z of a one-sided p
        sum += (rhos[i] < 0 ? -z : z);
    }
    const double combined = sum / std::sqrt(double(p_values.size()));
    return 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(combined)));
}

CorrelationReport correlate_groups(std::span<const MetricSeries> groups,
                                   std::span<const std::pair<std::string, std::string>> pairs,
                                   const CorrelateOptions& options) {
    if (groups.empty()) throw ConfigError("correlate_groups needs at least one group");

    std::set<std::string> involved;
    for (const auto& [a, b] : pairs) {
        involved.insert(a);
        involved.insert(b);
    }

    CorrelationReport report;
    std::vector<const MetricSeries*> kept;
    for (const auto& g : groups) {
        std::string reason;
        for (const auto& name : involved) {
            if (!g.find(name)) {
                reason = "missing column " + name;
                break;
            }
            if (!options.screen_stationarity) continue;
            try {
                const auto col = g.column(name);
                if (!adf_test(col).reject_unit_root || !pp_test(col).reject_unit_root) {
                    reason = "non-stationary " + name;
                    break;
                }
            } catch (const std::invalid_argument&) {
                reason = "too short for unit-root tests: " + name;
                break;
            }
        }
        if (reason.empty()) {
            kept.push_back(&g);
            report.included_groups.push_back(g.group);
        } else {
            report.excluded_groups.emplace_back(g.group, reason);
        }
    }
    if (kept.empty()) throw NumericalError("no group survived stationarity screening");

    for (const auto& [a, b] : pairs) {
        PairCorrelation pc;
        pc.var_a = a;
        pc.var_b = b;
        for (const auto* g : kept) {
            SpearmanResult s;
            try {
                s = spearman(g->column(a), g->column(b));
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (s.degenerate) continue;
            pc.groups.push_back(g->group);
            pc.group_rhos.push_back(s.rho);
            pc.group_p.push_back(s.p);
        }
        if (pc.group_rhos.empty()) {
            pc.mean_rho = std::numeric_limits<double>::quiet_NaN();
            pc.combined_p = std::numeric_limits<double>::quiet_NaN();
        } else {
            pc.mean_rho = fisher_z_mean(pc.group_rhos);
            pc.combined_p = pc.group_rhos.size() == 1 ? pc.group_p.front()
                                                      : stouffer_combined_p(pc.group_p, pc.group_rhos);
            pc.stars = std::string(stars(pc.combined_p));
        }
        report.pairs.push_back(std::move(pc));
    }
    return report;
}

}  // namespace coevo::stats
