#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coevo/stats/series.hpp"

namespace coevo::stats {

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;  ///< two-sided
    std::size_t n = 0;
    bool degenerate = false;  ///< constant input; rho reported as 0, p as 1
};

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman correlation over pairs where both entries are present. p from the t
/// approximation with n-2 degrees of freedom. Throws std::invalid_argument with fewer than
/// 3 complete pairs.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

/// "***" p < 0.001, "**" p < 0.01, "*" p < 0.1, otherwise empty.
std::string_view stars(double p);

/// tanh of the mean Fisher z. Identical inputs come back unchanged.
double fisher_z_mean(std::span<const double> rhos);

/// Stouffer's combination of two-sided p-values, each signed by its correlation's direction.
double stouffer_combined_p(std::span<const double> p_values, std::span<const double> rhos);

struct PairCorrelation {
    std::string var_a;
    std::string var_b;
    double mean_rho = 0.0;
    double combined_p = 1.0;
    std::string stars;
    std::vector<std::string> groups;  ///< groups contributing a non-degenerate rho
    std::vector<double> group_rhos;
    std::vector<double> group_p;
};

struct CorrelationReport {
    std::vector<PairCorrelation> pairs;
    std::vector<std::string> included_groups;
    std::vector<std::pair<std::string, std::string>> excluded_groups;  ///< (group, reason)
};

struct CorrelateOptions {
    /// Exclude groups in which any involved series fails ADF or PP at the 1% level.
    bool screen_stationarity = true;
};

/// Per-group Spearman correlations averaged with Fisher z, p-values combined with Stouffer.
/// Throws NumericalError when no group survives screening.
CorrelationReport correlate_groups(std::span<const MetricSeries> groups,
                                   std::span<const std::pair<std::string, std::string>> pairs,
                                   const CorrelateOptions& options = {});

}  // namespace coevo::stats
