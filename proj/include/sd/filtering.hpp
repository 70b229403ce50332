#pragma once

#include <span>

#include "sd/linalg.hpp"

namespace sd {

/// Coefficients of the variable-step second-order filter at step ratio
/// tau = k_m / k_{m-1}. The filtered value is
///   y = yhat - kappa * (yhat/(1+tau) - y_m + tau/(1+tau) * y_{m-1})
/// and the provisional value is recovered by the reconstruction weights,
/// which sum to one.
struct FilterCoefficients {
  double theta = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  std::array<double, 3> inner{};           // on (yhat, y_m, y_{m-1})
  std::array<double, 3> reconstruction{};  // on (y_new, y_m, y_{m-1})

  static FilterCoefficients make(double theta, double tau);
};

/// In-place-free filtered update; inputs are DOF vectors of equal length.
Vector apply_filter(std::span<const double> yhat, std::span<const double> ym,
                    std::span<const double> ym1, double theta, double tau);

/// Exact algebraic inverse of apply_filter.
Vector reconstruct_provisional(std::span<const double> ynew,
                               std::span<const double> ym,
                               std::span<const double> ym1, double theta,
                               double tau);

double apply_filter_scalar(double yhat, double ym, double ym1, double theta,
                           double tau);

}  // namespace sd
