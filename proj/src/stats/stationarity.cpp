#include "coevo/stats/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "coevo/stats/series.hpp"
#include "linalg.hpp"

namespace coevo::stats {

namespace {

constexpr std::size_t kMinLength = 20;

PBand band_of(double stat, Deterministic d) {
    const auto cv = critical_values(d);
    if (stat < cv.one) return PBand::Below1;
    if (stat < cv.five) return PBand::Below5;
    if (stat < cv.ten) return PBand::Below10;
    return PBand::AtLeast10;
}

StationarityResult finish(double stat, std::size_t lag, std::size_t nobs, Deterministic d, bool degenerate) {
    StationarityResult r;
    r.statistic = stat;
    r.lag_or_bandwidth = lag;
    r.nobs = nobs;
    r.p_band = band_of(stat, d);
    r.reject_unit_root = r.p_band == PBand::Below1;
    r.degenerate = degenerate;
    return r;
}

std::vector<double> prepare(std::span<const double> series) {
    auto y = complete(series);
    if (y.size() < kMinLength)
        throw std::invalid_argument("unit-root tests need at least 20 observations, got " + std::to_string(y.size()));
    return y;
}

bool is_constant(const std::vector<double>& y) {
    return std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
}

std::size_t deterministic_terms(Deterministic d) { return d == Deterministic::Constant ? 1 : 2; }

// Regressors [deterministics, y_{t-1}, dy_{t-1}..dy_{t-lags}] for t in [first, T).
// Returns the design matrix and the dy_t response.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> df_design(const std::vector<double>& y, std::size_t lags,
                                                      std::size_t first, Deterministic d) {
    const std::size_t rows = y.size() - first;
    const std::size_t det = deterministic_terms(d);
    Eigen::MatrixXd x(rows, det + 1 + lags);
    Eigen::VectorXd dy(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        x(r, 0) = 1.0;
        if (det == 2) x(r, 1) = double(t);
        x(r, det) = y[t - 1];
        for (std::size_t j = 1; j <= lags; ++j) x(r, det + j) = y[t - j] - y[t - j - 1];
        dy(r) = y[t] - y[t - 1];
    }
    return {std::move(x), std::move(dy)};
}

// t statistic of `coef` with a guard for exact fits.
double t_stat(double coef, double ssr, double dof, double xtx_inv, double scale) {
    const double s2 = ssr / dof;
    if (ssr <= 1e-24 * scale) {
        if (std::abs(coef) < 1e-9) return 0.0;
        return coef > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return coef / std::sqrt(s2 * xtx_inv);
}

}  // namespace

std::string_view to_string(PBand band) {
    switch (band) {
        case PBand::Below1: return "<0.01";
        case PBand::Below5: return "<0.05";
        case PBand::Below10: return "<0.10";
        case PBand::AtLeast10: return ">=0.10";
    }
    return "?";
}

CriticalValues critical_values(Deterministic d) {
    if (d == Deterministic::Constant) return {-3.43, -2.86, -2.57};
    return {-3.96, -3.41, -3.12};
}

std::size_t adf_max_lag(std::size_t length) {
    const auto rule = static_cast<std::size_t>(std::floor(12.0 * std::pow(double(length) / 100.0, 0.25)));
    // keep enough observations for the largest candidate model (constant-only regression)
    const std::size_t cap = length / 2 >= 2 ? length / 2 - 2 : 0;
    return std::min(rule, cap);
}

std::size_t pp_bandwidth(std::size_t length) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(double(length) / 100.0, 2.0 / 9.0)));
}

StationarityResult adf_test(std::span<const double> series, Deterministic d) {
    const auto y = prepare(series);
    if (is_constant(y)) return finish(-std::numeric_limits<double>::infinity(), 0, y.size() - 1, d, true);

    const std::size_t max_lag = adf_max_lag(y.size());
    const std::size_t det = deterministic_terms(d);

    // lag selection on the common sample t = max_lag + 1 .. T-1
    std::size_t best_lag = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= max_lag; ++p) {
        auto [x, dy] = df_design(y, p, max_lag + 1, d);
        const auto fit = detail::least_squares(x, dy);
        const double n = double(dy.size());
        const double k = double(x.cols());
        const double llf = -n / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(fit.ssr / n) + 1.0);
        const double bic = -2.0 * llf + std::log(n) * k;
        if (bic < best_bic) {
            best_bic = bic;
            best_lag = p;
        }
    }

    auto [x, dy] = df_design(y, best_lag, best_lag + 1, d);
    const auto fit = detail::least_squares(x, dy);
    const double dof = double(dy.size() - x.cols());
    const double scale = dy.squaredNorm();
    const double stat = t_stat(fit.beta(det), fit.ssr, dof, fit.xtx_inv_diag(det), scale);
    return finish(stat, best_lag, std::size_t(dy.size()), d, fit.ssr <= 1e-24 * scale);
}

StationarityResult pp_test(std::span<const double> series, Deterministic d) {
    const auto y = prepare(series);
    const std::size_t bandwidth = pp_bandwidth(y.size());
    if (is_constant(y)) return finish(-std::numeric_limits<double>::infinity(), bandwidth, y.size() - 1, d, true);

    const std::size_t rows = y.size() - 1;
    const std::size_t det = deterministic_terms(d);
    Eigen::MatrixXd x(rows, det + 1);
    Eigen::VectorXd lhs(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        x(r, 0) = 1.0;
        if (det == 2) x(r, 1) = double(r + 1);
        x(r, det) = y[r];
        lhs(r) = y[r + 1];
    }
    const auto fit = detail::least_squares(x, lhs);
    const double n = double(rows);
    const double k = double(x.cols());
    const double s2 = fit.ssr / (n - k);
    const double rho = fit.beta(det);
    const double sigma = std::sqrt(s2 * fit.xtx_inv_diag(det));

    if (fit.ssr <= 1e-24 * lhs.squaredNorm()) {
        const double stat = std::abs(rho - 1.0) < 1e-9 ? 0.0 : (rho > 1.0 ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
        return finish(stat, bandwidth, rows, d, true);
    }

    const auto& u = fit.residuals;
    const double gamma0 = fit.ssr / n;
    double lam2 = fit.ssr;
    for (std::size_t j = 1; j <= bandwidth && j < rows; ++j) {
        const double w = 1.0 - double(j) / double(bandwidth + 1);
        double gamma = 0.0;
        for (std::size_t t = j; t < rows; ++t) gamma += u(t) * u(t - j);
        lam2 += 2.0 * w * gamma;
    }
    lam2 /= n;
    const double lam = std::sqrt(lam2);
    const double s = std::sqrt(s2);
    const double stat =
        std::sqrt(gamma0 / lam2) * ((rho - 1.0) / sigma) - 0.5 * ((lam2 - gamma0) / lam) * (n * sigma / s);
    return finish(stat, bandwidth, rows, d, false);
}

}  // namespace coevo::stats
