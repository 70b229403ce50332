#include "sd/filtering.hpp"

#include <stdexcept>

namespace sd {

FilterCoefficients FilterCoefficients::make(double theta, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("filter: step ratio tau must be positive");
  FilterCoefficients fc;
  fc.theta = theta;
  fc.tau = tau;
  fc.kappa = (1.0 - 2.0 * theta) * (1.0 + tau) * tau /
             (2.0 * (1.0 - theta) * tau + 1.0);
  fc.inner = {1.0 / (1.0 + tau), -1.0, tau / (1.0 + tau)};
  fc.reconstruction = {(2.0 * (1.0 - theta) * tau + 1.0) / (tau + 1.0),
                       -(1.0 - 2.0 * theta) * tau,
                       (1.0 - 2.0 * theta) * tau * tau / (tau + 1.0)};
  return fc;
}

Vector apply_filter(std::span<const double> yhat, std::span<const double> ym,
                    std::span<const double> ym1, double theta, double tau) {
  if (yhat.size() != ym.size() || ym.size() != ym1.size())
    throw std::invalid_argument("apply_filter: vector lengths differ");
  const auto fc = FilterCoefficients::make(theta, tau);
  Vector out(yhat.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double bracket =
        fc.inner[0] * yhat[i] + fc.inner[1] * ym[i] + fc.inner[2] * ym1[i];
    out[i] = yhat[i] - fc.kappa * bracket;
  }
  return out;
}

Vector reconstruct_provisional(std::span<const double> ynew,
                               std::span<const double> ym,
                               std::span<const double> ym1, double theta,
                               double tau) {
  if (ynew.size() != ym.size() || ym.size() != ym1.size())
    throw std::invalid_argument("reconstruct_provisional: vector lengths differ");
  const auto fc = FilterCoefficients::make(theta, tau);
  Vector out(ynew.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = fc.reconstruction[0] * ynew[i] + fc.reconstruction[1] * ym[i] +
             fc.reconstruction[2] * ym1[i];
  return out;
}

double apply_filter_scalar(double yhat, double ym, double ym1, double theta,
                           double tau) {
  const auto fc = FilterCoefficients::make(theta, tau);
  return yhat - fc.kappa * (fc.inner[0] * yhat + fc.inner[1] * ym +
                            fc.inner[2] * ym1);
}

}  // namespace sd
