#include "sd/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "sd/filtering.hpp"

namespace sd {

Vector divided_difference(std::span<const Vector> values,
                          std::span<const double> times) {
  if (values.size() != times.size() || values.empty())
    throw std::invalid_argument("divided_difference: need matching nonempty samples");
  for (size_t i = 0; i < times.size(); ++i)
    for (size_t j = i + 1; j < times.size(); ++j)
      if (times[i] == times[j])
        throw std::invalid_argument("divided_difference: duplicate times");

  std::vector<Vector> work(values.begin(), values.end());
  const size_t n = work.size();
  for (size_t level = 1; level < n; ++level)
    for (size_t i = 0; i + level < n; ++i) {
      const double dt = times[i + level] - times[i];
      for (size_t d = 0; d < work[i].size(); ++d)
        work[i][d] = (work[i + 1][d] - work[i][d]) / dt;
    }
  return work[0];
}

double divided_difference_scalar(std::span<const double> values,
                                 std::span<const double> times) {
  std::vector<Vector> wrapped;
  wrapped.reserve(values.size());
  for (double v : values) wrapped.push_back(Vector{v});
  return divided_difference(wrapped, times)[0];
}

EstimatorFields est_filtered(const StateHistory& history) {
  if (history.size() < 4)
    throw std::logic_error("est_filtered: four accepted states required");
  std::array<double, 4> times;
  for (int i = 0; i < 4; ++i) times[i] = history.back(3 - i).t;
  const double km = times[3] - times[2];
  const double km1 = times[2] - times[1];
  const double km2 = times[1] - times[0];
  const double chi3 = km * (km + km1) * (km + km1 + km2);

  auto field = [&](auto member) {
    std::array<Vector, 4> vals{history.back(3).*member, history.back(2).*member,
                               history.back(1).*member, history.back(0).*member};
    Vector dd = divided_difference(vals, times);
    for (double& v : dd) v *= chi3;
    return dd;
  };
  return {field(&State::u), field(&State::phi)};
}

Vector est_unfiltered(std::span<const double> uhat, std::span<const double> um,
                      std::span<const double> um1, double theta, double tau) {
  const Vector filtered = apply_filter(uhat, um, um1, theta, tau);
  Vector out(uhat.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = uhat[i] - filtered[i];
  return out;
}

void ControllerConfig::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("controller: epsilon must be positive");
  if (!(0 < gamma_check && gamma_check < gamma_hat && gamma_hat < 1))
    throw std::invalid_argument("controller: need 0 < gamma_check < gamma_hat < 1");
  if (!(k_min < k_max)) throw std::invalid_argument("controller: k_min < k_max required");
  if (!(0 < tau_min && tau_min < tau_max))
    throw std::invalid_argument("controller: bad step-ratio bounds");
  if (!(growth_cap > 1)) throw std::invalid_argument("controller: growth cap must exceed 1");
}

namespace {

double ratio_power(double epsilon, double est, double p) {
  if (est <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(epsilon / est, p);
}

}  // namespace

StepDecision decide_step(double est_u_norm, double est_phi_norm, double k_m,
                         double sigma_prev, double k_prev,
                         int consecutive_rejections,
                         const ControllerConfig& config) {
  config.validate();
  if (est_u_norm < 0 || est_phi_norm < 0)
    throw std::invalid_argument("decide_step: estimator norms must be nonnegative");

  StepDecision d;
  d.est_u = est_u_norm;
  d.est_phi = est_phi_norm;
  const double min_est = std::min(est_u_norm, est_phi_norm);
  const double ru = ratio_power(config.epsilon, est_u_norm, config.order_exponent);
  const double rp = ratio_power(config.epsilon, est_phi_norm, config.order_exponent);

  if (min_est <= config.epsilon) {
    const double head = min_est < 0.25 * config.epsilon ? config.growth_cap : 1.0;
    d.sigma = std::min({head, ru, rp});
    d.accepted = true;
    double k_next = config.gamma_hat * d.sigma * k_m;
    k_next = std::clamp(k_next, config.tau_min * k_m, config.tau_max * k_m);
    d.next_or_retry_k = std::clamp(k_next, config.k_min, config.k_max);
    return d;
  }

  d.accepted = false;
  d.sigma = std::min({1.0, ru, rp});
  double retry;
  if (consecutive_rejections == 0) {
    // Composed with the acceptance rule this is (gamma_check/gamma_hat)*k_m;
    // the min keeps the retry below the attempt when k_m was clipped or
    // clamped away from the controller's proposal.
    retry = std::min(config.gamma_check * sigma_prev * k_prev,
                     config.gamma_check / config.gamma_hat * k_m);
  } else {
    retry = config.gamma_check * k_m;  // repeated rejections must keep shrinking
  }
  retry = std::max(retry, config.tau_min * k_prev);
  d.next_or_retry_k = std::max(retry, config.k_min);
  return d;
}

namespace {

State filtered_state(const State& provisional, const StateHistory& history,
                     double theta, double tau) {
  State out;
  out.t = provisional.t;
  out.u = apply_filter(provisional.u, history.back(0).u, history.back(1).u,
                       theta, tau);
  out.p = apply_filter(provisional.p, history.back(0).p, history.back(1).p,
                       theta, tau);
  out.phi = apply_filter(provisional.phi, history.back(0).phi,
                         history.back(1).phi, theta, tau);
  return out;
}

}  // namespace

AdaptiveRunResult run_adaptive(const TransientProblem& problem,
                               ThetaConfig theta_config, Coupling coupling,
                               bool filtered, const ControllerConfig& config,
                               double t0, double k0, double T) {
  theta_config.validate();
  config.validate();
  if (!(k0 > 0)) throw std::invalid_argument("run_adaptive: k0 must be positive");

  ThetaStepper stepper(problem.forms(), problem.dirichlet(), theta_config);
  AdaptiveRunResult result;
  StateHistory history;

  const int n_bootstrap = filtered ? 3 : 2;
  for (int i = 0; i < n_bootstrap; ++i) {
    history.push(problem.sample_state(t0 + i * k0));
    result.trajectory.push_back(history.back(0));
  }

  const SparseMatrix& mass_u = problem.norm_mass_u();
  const SparseMatrix& mass_phi = problem.norm_mass_phi();

  const auto start = std::chrono::steady_clock::now();
  double k_proposed = k0;
  double sigma_prev = 1.0;
  double k_prev = k0;
  int consecutive_rejections = 0;
  int m = static_cast<int>(result.trajectory.size());
  const double tiny = 1e-12 * std::max(1.0, std::abs(T - t0));

  while (T - history.back(0).t > tiny) {
    const double t_old = history.back(0).t;
    const bool clipped = T - t_old < k_proposed * (1.0 + 1e-9);
    const double k = clipped ? T - t_old : k_proposed;
    const double tau = history.ratio(k);

    const StepForcing forcing = problem.forcing(t_old, t_old + k);
    const State provisional = coupling == Coupling::Coupled
                                  ? stepper.step_coupled(history, k, forcing)
                                  : stepper.step_decoupled(history, k, forcing);

    double est_u, est_phi;
    State candidate;
    if (filtered) {
      candidate = filtered_state(provisional, history, theta_config.theta, tau);
      StateHistory with_candidate = history;
      with_candidate.push(candidate);
      const EstimatorFields est = est_filtered(with_candidate);
      est_u = mass_norm(mass_u, est.u);
      est_phi = mass_norm(mass_phi, est.phi);
    } else {
      candidate = provisional;
      est_u = mass_norm(mass_u,
                        est_unfiltered(provisional.u, history.back(0).u,
                                       history.back(1).u, theta_config.theta, tau));
      est_phi = mass_norm(mass_phi,
                          est_unfiltered(provisional.phi, history.back(0).phi,
                                         history.back(1).phi, theta_config.theta,
                                         tau));
    }

    const StepDecision decision = decide_step(
        est_u, est_phi, k, sigma_prev, k_prev, consecutive_rejections, config);

    StepLogRow row;
    row.m = m;
    row.t = t_old + k;
    row.k = k;
    row.tau = tau;
    row.sigma = decision.sigma;
    row.est_u = est_u;
    row.est_phi = est_phi;
    row.accepted = decision.accepted;
    row.reject_count = consecutive_rejections;
    result.log.push_back(row);

    if (decision.accepted) {
      history.push(candidate);
      result.trajectory.push_back(std::move(candidate));
      result.accepted_k.push_back(k);
      k_prev = k;
      sigma_prev = decision.sigma;
      k_proposed = decision.next_or_retry_k;
      consecutive_rejections = 0;
      ++m;
    } else {
      ++result.rejections;
      ++consecutive_rejections;
      if (consecutive_rejections > config.max_consecutive_rejections)
        throw ControllerStallError(
            "step controller stalled after " +
            std::to_string(consecutive_rejections) +
            " consecutive rejections at t = " + std::to_string(t_old));
      k_proposed = decision.next_or_retry_k;
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

FixedRunResult run_replay(const TransientProblem& problem,
                          ThetaConfig theta_config, Coupling coupling,
                          bool filtered, double t0, double k0,
                          std::span<const double> accepted_k) {
  // Rebuild the bootstrap states, then execute the logged steps with the
  // controller bypassed.
  theta_config.validate();
  ThetaStepper stepper(problem.forms(), problem.dirichlet(), theta_config);
  FixedRunResult result;
  StateHistory history;
  const int n_bootstrap = filtered ? 3 : 2;
  for (int i = 0; i < n_bootstrap; ++i) {
    history.push(problem.sample_state(t0 + i * k0));
    result.trajectory.push_back(history.back(0));
  }
  for (double k : accepted_k) {
    const double t_old = history.back(0).t;
    const StepForcing forcing = problem.forcing(t_old, t_old + k);
    State next = coupling == Coupling::Coupled
                     ? stepper.step_coupled(history, k, forcing)
                     : stepper.step_decoupled(history, k, forcing);
    if (filtered)
      next = filtered_state(next, history, theta_config.theta, history.ratio(k));
    history.push(next);
    result.trajectory.push_back(std::move(next));
  }
  return result;
}

std::string step_log_csv(std::span<const StepLogRow> log) {
  std::string out = "m,t,k,tau,sigma,est_u,est_phi,verdict,reject_count\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%s,%d\n",
                  r.m, r.t, r.k, r.tau, r.sigma, r.est_u, r.est_phi,
                  r.accepted ? "accept" : "reject", r.reject_count);
    out += buf;
  }
  return out;
}

}  // namespace sd
