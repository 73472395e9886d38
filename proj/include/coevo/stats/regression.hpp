#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coevo/flagged.hpp"
#include "coevo/stats/series.hpp"

namespace coevo::stats {

struct OlsResult {
    std::vector<double> coefficients;  ///< one per input column, then the intercept; dropped columns get 0
    double r2 = 0.0;
    bool degenerate = false;                  ///< constant target (SST = 0); r2 is NaN
    std::vector<std::size_t> dropped_columns;  ///< collinear inputs removed before fitting
};

/// Least squares through a column-pivoted Householder QR. Columns that add no rank (in
/// column order) are dropped. Requires rows > columns.
OlsResult ols_fit(const Eigen::MatrixXd& inputs, std::span<const double> target, bool intercept = true);

/// Nadaraya-Watson regression with a Gaussian product kernel on standardized inputs.
class NwModel {
public:
    NwModel(Eigen::MatrixXd inputs, std::vector<double> target, std::vector<double> bandwidths);

    /// Prediction at a query in original units. Flagged when every kernel weight underflows
    /// and the global mean is returned instead.
    Flagged<double> predict(std::span<const double> query) const;

    /// Prediction for training row `i` with that row left out.
    Flagged<double> predict_leave_one_out(std::size_t i) const;

    std::size_t samples() const noexcept { return static_cast<std::size_t>(z_.rows()); }
    std::size_t dimensions() const noexcept { return static_cast<std::size_t>(z_.cols()); }
    const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }

private:
    Flagged<double> weighted_mean(const Eigen::RowVectorXd& zq, std::optional<std::size_t> skip) const;

    Eigen::MatrixXd z_;  // standardized inputs
    std::vector<double> target_;
    std::vector<double> bandwidths_;  // in standardized units
    Eigen::RowVectorXd mean_, scale_;
    double target_mean_ = 0.0;
};

/// Silverman's rule on standardized inputs: 1.06 * n^(-1/5) in every dimension.
std::vector<double> silverman_bandwidths(std::size_t samples, std::size_t dimensions);

struct NwFit {
    NwModel model;
    std::vector<double> loo_predictions;
    double loo_r2 = 0.0;        ///< NaN when degenerate
    bool degenerate = false;    ///< constant target
    std::size_t fallbacks = 0;  ///< leave-one-out queries that fell back to the mean
};

/// Fits NW (default Silverman bandwidths) and scores it by leave-one-out R^2. Needs >= 10
/// samples and positive bandwidths. Leave-one-out predictions run in parallel.
NwFit nw_regress(const Eigen::MatrixXd& inputs, std::span<const double> target,
                 std::optional<std::vector<double>> bandwidths = std::nullopt);

/// Serial reference for the leave-one-out predictions inside nw_regress.
std::vector<double> nw_loo_predictions_reference(const NwModel& model);

/// R^2 = 1 - SSR/SST; NaN when SST = 0.
double r_squared(std::span<const double> target, std::span<const double> predicted);

enum class RegressionMethod { Ols, Nw };

struct Ordering {
    std::string name;
    std::vector<std::string> predictors;
};

struct CurvePoint {
    std::string ordering;
    std::size_t step = 0;  ///< number of predictors in the model
    std::string added;
    double r2 = 0.0;  ///< leave-one-out for NW, in-sample for OLS
    std::size_t rows = 0;
    bool leak = false;  ///< the target itself is among the predictors
    bool degenerate = false;
};

/// For each ordering and each prefix of it, fit on the rows where target and all prefix
/// predictors are present and record R^2.
std::vector<CurvePoint> incremental_r2_curve(const MetricSeries& series, const std::string& target,
                                             std::span<const Ordering> orderings, RegressionMethod method);

}  // namespace coevo::stats
