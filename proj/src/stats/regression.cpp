#include "coevo/stats/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace coevo::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRankTolerance = 1e-10;

double centered_ss(std::span<const double> y) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    return ss;
}

bool constant_target(std::span<const double> y) {
    return std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
}

}  // namespace

double r_squared(std::span<const double> target, std::span<const double> predicted) {
    if (target.size() != predicted.size() || target.empty()) throw std::invalid_argument("r_squared: bad input");
    if (constant_target(target)) return kNaN;
    double ssr = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) ssr += (target[i] - predicted[i]) * (target[i] - predicted[i]);
    return 1.0 - ssr / centered_ss(target);
}

OlsResult ols_fit(const Eigen::MatrixXd& inputs, std::span<const double> target, bool intercept) {
    const auto n = inputs.rows();
    const auto p = inputs.cols();
    if (static_cast<std::size_t>(n) != target.size()) throw std::invalid_argument("ols_fit: row count mismatch");
    if (n <= p + (intercept ? 1 : 0)) throw std::invalid_argument("ols_fit needs more rows than columns");
    for (double v : target)
        if (!std::isfinite(v)) throw std::invalid_argument("ols_fit: masked or non-finite target");
    if (!inputs.allFinite()) throw std::invalid_argument("ols_fit: masked or non-finite input");

    // Greedy rank screen on unit-norm columns so the tolerance is scale free.
    std::vector<Eigen::Index> kept;
    Eigen::MatrixXd basis(n, 0);
    if (intercept) {
        basis = Eigen::MatrixXd::Constant(n, 1, 1.0 / std::sqrt(double(n)));
    }
    OlsResult result;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double norm = inputs.col(j).norm();
        if (norm == 0.0) {
            result.dropped_columns.push_back(std::size_t(j));
            continue;
        }
        Eigen::MatrixXd trial(n, basis.cols() + 1);
        trial << basis, inputs.col(j) / norm;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
        qr.setThreshold(kRankTolerance);
        if (qr.rank() == trial.cols()) {
            basis = std::move(trial);
            kept.push_back(j);
        } else {
            result.dropped_columns.push_back(std::size_t(j));
        }
    }

    Eigen::MatrixXd x(n, Eigen::Index(kept.size()) + (intercept ? 1 : 0));
    for (std::size_t k = 0; k < kept.size(); ++k) x.col(Eigen::Index(k)) = inputs.col(kept[k]);
    if (intercept) x.col(x.cols() - 1).setOnes();
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), n);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    if (x.cols() > 0) beta = x.colPivHouseholderQr().solve(y);

    result.coefficients.assign(std::size_t(p) + (intercept ? 1 : 0), 0.0);
    for (std::size_t k = 0; k < kept.size(); ++k) result.coefficients[std::size_t(kept[k])] = beta(Eigen::Index(k));
    if (intercept) result.coefficients.back() = beta(x.cols() - 1);

    if (constant_target(target)) {
        result.degenerate = true;
        result.r2 = kNaN;
        return result;
    }
    const Eigen::VectorXd fitted = x * beta;
    const double ssr = (y - fitted).squaredNorm();
    result.r2 = 1.0 - ssr / centered_ss(target);
    return result;
}

std::vector<double> silverman_bandwidths(std::size_t samples, std::size_t dimensions) {
    return std::vector<double>(dimensions, 1.06 * std::pow(double(samples), -0.2));
}

NwModel::NwModel(Eigen::MatrixXd inputs, std::vector<double> target, std::vector<double> bandwidths)
    : target_(std::move(target)), bandwidths_(std::move(bandwidths)) {
    const auto n = inputs.rows();
    const auto d = inputs.cols();
    if (static_cast<std::size_t>(n) != target_.size()) throw std::invalid_argument("NW: row count mismatch");
    if (bandwidths_.size() != static_cast<std::size_t>(d)) throw std::invalid_argument("NW: one bandwidth per input");
    for (double h : bandwidths_)
        if (!(h > 0.0)) throw std::invalid_argument("NW: bandwidths must be positive");
    if (!inputs.allFinite()) throw std::invalid_argument("NW: masked or non-finite input");

    mean_ = inputs.colwise().mean();
    scale_ = ((inputs.rowwise() - mean_).array().square().colwise().sum() / double(n)).sqrt();
    for (Eigen::Index j = 0; j < d; ++j)
        if (scale_(j) == 0.0) scale_(j) = 1.0;
    z_ = (inputs.rowwise() - mean_).array().rowwise() / scale_.array();
    target_mean_ = std::accumulate(target_.begin(), target_.end(), 0.0) / double(n);
}

Flagged<double> NwModel::weighted_mean(const Eigen::RowVectorXd& zq, std::optional<std::size_t> skip) const {
    double num = 0.0, den = 0.0;
    const auto n = z_.rows();
    const auto d = z_.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (skip && std::size_t(i) == *skip) continue;
        double q = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double u = (zq(j) - z_(i, j)) / bandwidths_[std::size_t(j)];
            q += u * u;
        }
        const double w = std::exp(-0.5 * q);
        num += w * target_[std::size_t(i)];
        den += w;
    }
    if (den > 0.0 && std::isfinite(den)) return {num / den, false};
    if (skip) {
        const double total = target_mean_ * double(n);
        return {(total - target_[*skip]) / double(n - 1), true};
    }
    return {target_mean_, true};
}

Flagged<double> NwModel::predict(std::span<const double> query) const {
    if (query.size() != dimensions()) throw std::invalid_argument("NW: query dimension mismatch");
    Eigen::RowVectorXd zq(z_.cols());
    for (Eigen::Index j = 0; j < z_.cols(); ++j) zq(j) = (query[std::size_t(j)] - mean_(j)) / scale_(j);
    return weighted_mean(zq, std::nullopt);
}

Flagged<double> NwModel::predict_leave_one_out(std::size_t i) const {
    return weighted_mean(z_.row(Eigen::Index(i)), i);
}

std::vector<double> nw_loo_predictions_reference(const NwModel& model) {
    std::vector<double> out(model.samples());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = model.predict_leave_one_out(i).value;
    return out;
}

NwFit nw_regress(const Eigen::MatrixXd& inputs, std::span<const double> target,
                 std::optional<std::vector<double>> bandwidths) {
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (n < 10) throw std::invalid_argument("NW regression needs at least 10 samples");
    auto h = bandwidths ? std::move(*bandwidths) : silverman_bandwidths(n, std::size_t(inputs.cols()));
    NwFit fit{NwModel(inputs, std::vector<double>(target.begin(), target.end()), std::move(h)), {}, 0.0, false, 0};

    fit.loo_predictions.assign(n, 0.0);
    std::vector<char> fell_back(n, 0);
    const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const auto p = fit.model.predict_leave_one_out(std::size_t(i));
        fit.loo_predictions[std::size_t(i)] = p.value;
        fell_back[std::size_t(i)] = p.degenerate;
    }
    fit.fallbacks = std::size_t(std::count(fell_back.begin(), fell_back.end(), 1));
    fit.loo_r2 = r_squared(target, fit.loo_predictions);
    fit.degenerate = std::isnan(fit.loo_r2);
    return fit;
}

std::vector<CurvePoint> incremental_r2_curve(const MetricSeries& series, const std::string& target,
                                             std::span<const Ordering> orderings, RegressionMethod method) {
    const auto y_all = series.column(target);
    std::vector<CurvePoint> curve;
    for (const auto& ordering : orderings) {
        std::vector<std::span<const double>> cols;
        for (std::size_t step = 1; step <= ordering.predictors.size(); ++step) {
            const auto& added = ordering.predictors[step - 1];
            cols.push_back(series.column(added));

            CurvePoint pt;
            pt.ordering = ordering.name;
            pt.step = step;
            pt.added = added;
            pt.leak = std::find(ordering.predictors.begin(), ordering.predictors.begin() + std::ptrdiff_t(step),
                                target) != ordering.predictors.begin() + std::ptrdiff_t(step);

            std::vector<std::size_t> rows;
            for (std::size_t t = 0; t < series.rows(); ++t) {
                bool ok = !std::isnan(y_all[t]);
                for (const auto& c : cols) ok = ok && !std::isnan(c[t]);
                if (ok) rows.push_back(t);
            }
            pt.rows = rows.size();
            Eigen::MatrixXd x(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
            std::vector<double> y(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                y[r] = y_all[rows[r]];
                for (std::size_t c = 0; c < cols.size(); ++c) x(Eigen::Index(r), Eigen::Index(c)) = cols[c][rows[r]];
            }

            const std::size_t needed = method == RegressionMethod::Nw ? 10 : cols.size() + 2;
            if (rows.size() < needed) {
                pt.r2 = kNaN;
                pt.degenerate = true;
            } else if (method == RegressionMethod::Nw) {
                const auto fit = nw_regress(x, y);
                pt.r2 = fit.loo_r2;
                pt.degenerate = fit.degenerate;
            } else {
                const auto fit = ols_fit(x, y);
                pt.r2 = fit.r2;
                pt.degenerate = fit.degenerate;
            }
            curve.push_back(std::move(pt));
        }
    }
    return curve;
}

}  // namespace coevo::stats
