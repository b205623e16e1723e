#pragma once

#include <span>
#include <vector>

namespace urbanpulse {

/// y_t = c + sum_i phi_i y_{t-i} + e_t + sum_j theta_j e_{t-j}.
struct ArmaModel {
    int p{24};
    int q{1};
    std::vector<double> phi;
    std::vector<double> theta;
    double c{0.0};
    double sigma2{0.0};

    /// c / (1 - sum phi); the level a stationary forecast converges to.
    double process_mean() const;
};

/// Hannan-Rissanen: a long autoregression (order max(min(20, n/4), p))
/// estimates the innovations, then one least-squares regression on lagged
/// values and lagged innovations gives c, phi, theta. AR roots on or outside
/// the unit circle are reflected inside (the intercept then matches the
/// sample mean) and MA roots likewise, so forecasts converge. Throws DataError for
/// short, non-finite, or constant series.
ArmaModel fit_arma(std::span<const double> series, int p = 24, int q = 1);

/// Recursive multi-step forecast; innovations over `history` are
/// reconstructed from the recursion and future innovations are 0.
std::vector<double> forecast_arma(const ArmaModel& model, std::span<const double> history,
                                  int horizon);

}  // namespace urbanpulse
