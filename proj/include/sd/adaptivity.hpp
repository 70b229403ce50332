#pragma once

#include <span>
#include <string>
#include <vector>

#include "sd/stepping.hpp"

namespace sd {

struct ControllerStallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Newton divided difference y[t_n, ..., t_{n-j}] over j+1 samples,
/// computed per vector entry. values[i] is the sample at times[i].
Vector divided_difference(std::span<const Vector> values,
                          std::span<const double> times);
double divided_difference_scalar(std::span<const double> values,
                                 std::span<const double> times);

/// Local error fields of the filtered scheme: chi^3 * (third divided
/// difference) of the newest four accepted states, where chi^3 =
/// k_m (k_m + k_{m-1}) (k_m + k_{m-1} + k_{m-2}).
struct EstimatorFields {
  Vector u;
  Vector phi;
};
EstimatorFields est_filtered(const StateHistory& history);

/// Local error field of the unfiltered scheme: exactly the filter
/// correction, kappa * (uhat/(1+tau) - u_m + tau/(1+tau) u_{m-1}).
Vector est_unfiltered(std::span<const double> uhat, std::span<const double> um,
                      std::span<const double> um1, double theta, double tau);

struct ControllerConfig {
  double epsilon = 1e-4;
  double gamma_hat = 0.9;    // damps accepted growth
  double gamma_check = 0.6;  // shrinks rejected steps
  double growth_cap = 2.0;
  double order_exponent = 1.0 / 3.0;  // 1/3 filtered, 1/2 unfiltered
  double tau_min = 0.1;
  double tau_max = 2.0;
  double k_min = 1e-8;
  double k_max = 0.5;
  int max_consecutive_rejections = 25;

  void validate() const;
};

struct StepDecision {
  bool accepted = false;
  double next_or_retry_k = 0.0;  // k_{m+1} when accepted, retry k_m otherwise
  double sigma = 0.0;            // controller factor (informational on reject)
  double est_u = 0.0, est_phi = 0.0;
};

/// Acceptance bands on min(|EST_u|, |EST_phi|): below eps/4 grow up to the
/// cap, up to eps hold, above eps reject with a shrunken retry. sigma_prev
/// and k_prev describe the last accepted step; consecutive_rejections makes
/// repeated retries strictly decrease.
StepDecision decide_step(double est_u_norm, double est_phi_norm, double k_m,
                         double sigma_prev, double k_prev,
                         int consecutive_rejections,
                         const ControllerConfig& config);

struct StepLogRow {
  int m = 0;            // index of the attempted state
  double t = 0.0;       // attempted target time
  double k = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double est_u = 0.0;
  double est_phi = 0.0;
  bool accepted = false;
  int reject_count = 0;  // consecutive rejections before this attempt
};

struct AdaptiveRunResult {
  std::vector<State> trajectory;   // accepted states, bootstrap included
  std::vector<StepLogRow> log;     // every attempt
  std::vector<double> accepted_k;  // executed step sizes after bootstrap
  int rejections = 0;
  double seconds = 0.0;
};

/// Adaptive driver. Bootstrap states are sampled from the problem at
/// t0, t0+k0 (and t0+2*k0 when filtered); the controller then drives the
/// step size until the trajectory lands on T exactly.
AdaptiveRunResult run_adaptive(const TransientProblem& problem,
                               ThetaConfig theta_config, Coupling coupling,
                               bool filtered, const ControllerConfig& config,
                               double t0, double k0, double T);

/// Re-executes a logged run with the controller bypassed; reproduces the
/// accepted trajectory bit for bit. k0 is the bootstrap spacing of the
/// original run.
FixedRunResult run_replay(const TransientProblem& problem,
                          ThetaConfig theta_config, Coupling coupling,
                          bool filtered, double t0, double k0,
                          std::span<const double> accepted_k);

std::string step_log_csv(std::span<const StepLogRow> log);

}  // namespace sd
