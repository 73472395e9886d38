#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace coevo::stats {

/// Bands of the asymptotic unit-root distribution the statistic falls into.
enum class PBand { Below1, Below5, Below10, AtLeast10 };

std::string_view to_string(PBand band);

/// Deterministic terms in the test regression.
enum class Deterministic { Constant, ConstantTrend };

struct StationarityResult {
    double statistic = 0.0;
    std::size_t lag_or_bandwidth = 0;  ///< ADF: augmenting lags; PP: Bartlett bandwidth
    std::size_t nobs = 0;              ///< observations in the final regression
    PBand p_band = PBand::AtLeast10;
    bool reject_unit_root = false;  ///< at the 1% level
    bool degenerate = false;        ///< constant series, treated as trivially stationary
};

/// Asymptotic critical values (1%, 5%, 10%).
struct CriticalValues {
    double one, five, ten;
};
CriticalValues critical_values(Deterministic d);

/// Augmented Dickey-Fuller test. Masked (NaN) entries are dropped first; at least 20
/// observations must remain (std::invalid_argument otherwise). The number of lagged
/// differences minimizes BIC over 0..floor(12 (T/100)^(1/4)) on a common sample, and the
/// chosen model is refit on every available observation.
StationarityResult adf_test(std::span<const double> series, Deterministic d = Deterministic::Constant);

/// Phillips-Perron Z-tau from the lag-0 Dickey-Fuller regression with a Bartlett-kernel
/// long-run variance, bandwidth floor(4 (T/100)^(2/9)).
StationarityResult pp_test(std::span<const double> series, Deterministic d = Deterministic::Constant);

/// Largest lag considered by adf_test for a series of length T.
std::size_t adf_max_lag(std::size_t length);
/// Bartlett bandwidth used by pp_test for a series of length T.
std::size_t pp_bandwidth(std::size_t length);

}  // namespace coevo::stats
