#include "sd/stepping.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sd/filtering.hpp"

namespace sd {

void StateHistory::push(State s) {
  if (!states_.empty() && !(s.t > states_.back().t))
    throw std::invalid_argument("StateHistory: times must strictly increase");
  states_.push_back(std::move(s));
  if (states_.size() > capacity) states_.pop_front();
}

double StateHistory::last_step() const {
  if (states_.size() < 2)
    throw std::logic_error("StateHistory: need two states for a step size");
  return back(0).t - back(1).t;
}

double StateHistory::step_before_last() const {
  if (states_.size() < 3)
    throw std::logic_error("StateHistory: need three states");
  return back(1).t - back(2).t;
}

void ThetaConfig::validate() const {
  if (!(theta > 0.0) || !(theta < 0.5))
    throw std::invalid_argument("theta must lie strictly inside (0, 1/2)");
  if (extrapolation_order != 1 && extrapolation_order != 2)
    throw std::invalid_argument("extrapolation order must be 1 or 2");
}

std::array<double, 2> interface_extrapolation_weights(int order, double theta,
                                                      double tau) {
  if (order == 1) return {1.0, 0.0};
  if (order != 2) throw std::invalid_argument("extrapolation order must be 1 or 2");
  const double c = (1.0 - theta) * tau;
  return {1.0 + c, -c};
}

Vector constraint_rhs(const SparseMatrix& b, std::span<const double> u_m,
                      double theta) {
  Vector out = b.multiply(u_m);
  const double scale = -theta / (1.0 - theta);
  for (double& v : out) v *= scale;
  return out;
}

// Factorizations are reused across same-size steps (the fixed-step drivers
// hit one key for the whole run). Adaptive runs change k nearly every
// attempt, so each slot holds only the most recent few factorizations.
struct ThetaStepper::Cache {
  struct Slot {
    static constexpr size_t capacity = 3;
    std::vector<std::pair<double, std::unique_ptr<ConstrainedSystem>>> entries;

    template <typename Build>
    const ConstrainedSystem& get(double k, Build&& build) {
      for (auto& [key, sys] : entries)
        if (key == k) return *sys;
      if (entries.size() >= capacity) entries.erase(entries.begin());
      entries.emplace_back(k, build());
      return *entries.back().second;
    }
  };
  Slot coupled, stokes, darcy;
};

ThetaStepper::ThetaStepper(const SystemForms& forms,
                           const DirichletSpec& dirichlet, ThetaConfig config)
    : forms_(forms), dirichlet_(dirichlet), config_(config),
      cache_(std::make_shared<Cache>()) {
  config_.validate();
  nu_ = forms.Mf.rows();
  np_ = forms.B.rows();
  nh_ = forms.Mp.rows();
  bt_ = forms.B.transpose();
}

namespace {

// Assembles the flat matrix [u p phi] for the monolithic step, the [u p]
// matrix for the fluid substep, or the [phi] matrix for the porous substep.
SparseMatrix compose_step_matrix(const SystemForms& f, const SparseMatrix& bt,
                                 double k, double theta, int which /*0,1,2*/) {
  const double w = 1.0 - theta;
  BlockSystem bs;
  if (which == 0 || which == 1) {
    const int gu = bs.add_group("velocity", f.Mf.rows());
    const int gp = bs.add_group("pressure", f.B.rows());
    bs.set_block(gu, gu, axpy_compose({{1.0 / k, &f.Mf}, {w, &f.Af}}));
    bs.set_block(gu, gp, axpy_compose({{w, &bt}}));
    bs.set_block(gp, gu, axpy_compose({{1.0, &f.B}}));
    if (which == 0) {
      const int gh = bs.add_group("head", f.Mp.rows());
      bs.set_block(gu, gh, axpy_compose({{w, &f.Cg}}));
      const SparseMatrix cgt = f.Cg.transpose();
      bs.set_block(gh, gu, axpy_compose({{-w, &cgt}}));
      bs.set_block(gh, gh, axpy_compose({{1.0 / k, &f.Mp}, {w, &f.Ap}}));
    }
  } else {
    const int gh = bs.add_group("head", f.Mp.rows());
    bs.set_block(gh, gh, axpy_compose({{1.0 / k, &f.Mp}, {w, &f.Ap}}));
  }
  return bs.flatten();
}

}  // namespace

const ConstrainedSystem& ThetaStepper::coupled_system(double k) const {
  return cache_->coupled.get(k, [&] {
    std::vector<int> constrained = dirichlet_.u_dofs;
    if (dirichlet_.pressure_pin) constrained.push_back(nu_ + *dirichlet_.pressure_pin);
    for (int d : dirichlet_.phi_dofs) constrained.push_back(nu_ + np_ + d);
    return std::make_unique<ConstrainedSystem>(
        compose_step_matrix(forms_, bt_, k, config_.theta, 0), constrained);
  });
}

const ConstrainedSystem& ThetaStepper::stokes_system(double k) const {
  return cache_->stokes.get(k, [&] {
    std::vector<int> constrained = dirichlet_.u_dofs;
    if (dirichlet_.pressure_pin) constrained.push_back(nu_ + *dirichlet_.pressure_pin);
    return std::make_unique<ConstrainedSystem>(
        compose_step_matrix(forms_, bt_, k, config_.theta, 1), constrained);
  });
}

const ConstrainedSystem& ThetaStepper::darcy_system(double k) const {
  return cache_->darcy.get(k, [&] {
    return std::make_unique<ConstrainedSystem>(
        compose_step_matrix(forms_, bt_, k, config_.theta, 2),
        dirichlet_.phi_dofs);
  });
}

namespace {

void check_step_size(double k) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("step size must be positive and finite");
}

Vector gather(std::span<const double> full, std::span<const int> ids) {
  Vector out(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) out[i] = full[ids[i]];
  return out;
}

}  // namespace

State ThetaStepper::step_coupled(const StateHistory& history, double k,
                                 const StepForcing& forcing) const {
  check_step_size(k);
  if (history.size() < 1) throw std::invalid_argument("step: empty history");
  const State& old = history.back(0);
  const double theta = config_.theta;

  // Momentum rows.
  Vector rhs_u = vec_combine(1.0 - theta, forcing.load_u_new, theta,
                             forcing.load_u_old);
  vec_axpy_inplace(rhs_u, 1.0 / k, forms_.Mf.multiply(old.u));
  vec_axpy_inplace(rhs_u, -theta, forms_.Af.multiply(old.u));
  vec_axpy_inplace(rhs_u, -theta, bt_.multiply(old.p));
  vec_axpy_inplace(rhs_u, -theta, forms_.Cg.multiply(old.phi));

  // Constraint rows.
  Vector rhs_p = constraint_rhs(forms_.B, old.u, theta);

  // Porous rows.
  Vector rhs_phi = vec_combine(1.0 - theta, forcing.load_phi_new, theta,
                               forcing.load_phi_old);
  vec_axpy_inplace(rhs_phi, 1.0 / k, forms_.Mp.multiply(old.phi));
  vec_axpy_inplace(rhs_phi, -theta, forms_.Ap.multiply(old.phi));
  vec_axpy_inplace(rhs_phi, theta, forms_.Cg.multiply_transpose(old.u));

  Vector rhs(nu_ + np_ + nh_);
  std::copy(rhs_u.begin(), rhs_u.end(), rhs.begin());
  std::copy(rhs_p.begin(), rhs_p.end(), rhs.begin() + nu_);
  std::copy(rhs_phi.begin(), rhs_phi.end(), rhs.begin() + nu_ + np_);

  Vector constrained_values = forcing.u_dirichlet;
  if (dirichlet_.pressure_pin)
    constrained_values.push_back(forcing.pressure_pin_value);
  constrained_values.insert(constrained_values.end(),
                            forcing.phi_dirichlet.begin(),
                            forcing.phi_dirichlet.end());

  const Vector x = coupled_system(k).solve(rhs, constrained_values);
  State out;
  out.t = old.t + k;
  out.u.assign(x.begin(), x.begin() + nu_);
  out.p.assign(x.begin() + nu_, x.begin() + nu_ + np_);
  out.phi.assign(x.begin() + nu_ + np_, x.end());
  return out;
}

void ThetaStepper::stokes_substep(const StateHistory& history, double k,
                                  const StepForcing& forcing, State& out) const {
  const State& old = history.back(0);
  const double theta = config_.theta;

  Vector rhs_u = vec_combine(1.0 - theta, forcing.load_u_new, theta,
                             forcing.load_u_old);
  vec_axpy_inplace(rhs_u, 1.0 / k, forms_.Mf.multiply(old.u));
  vec_axpy_inplace(rhs_u, -theta, forms_.Af.multiply(old.u));
  vec_axpy_inplace(rhs_u, -theta, bt_.multiply(old.p));

  // Explicit interface datum from previous head states.
  const int order = config_.extrapolation_order;
  if (order == 2 && history.size() < 2)
    throw std::invalid_argument("decoupled step: order-2 extrapolation needs two states");
  const double tau = history.size() >= 2 ? k / history.last_step() : 1.0;
  const auto w = interface_extrapolation_weights(order, theta, tau);
  Vector phi_star = old.phi;
  for (double& v : phi_star) v *= w[0];
  if (w[1] != 0.0) vec_axpy_inplace(phi_star, w[1], history.back(1).phi);
  vec_axpy_inplace(rhs_u, -1.0, forms_.Cg.multiply(phi_star));

  Vector rhs_p = constraint_rhs(forms_.B, old.u, theta);

  Vector rhs(nu_ + np_);
  std::copy(rhs_u.begin(), rhs_u.end(), rhs.begin());
  std::copy(rhs_p.begin(), rhs_p.end(), rhs.begin() + nu_);

  Vector constrained_values = forcing.u_dirichlet;
  if (dirichlet_.pressure_pin)
    constrained_values.push_back(forcing.pressure_pin_value);

  const Vector x = stokes_system(k).solve(rhs, constrained_values);
  out.u.assign(x.begin(), x.begin() + nu_);
  out.p.assign(x.begin() + nu_, x.end());
}

void ThetaStepper::darcy_substep(const StateHistory& history, double k,
                                 const StepForcing& forcing, State& out) const {
  const State& old = history.back(0);
  const double theta = config_.theta;

  Vector rhs = vec_combine(1.0 - theta, forcing.load_phi_new, theta,
                           forcing.load_phi_old);
  vec_axpy_inplace(rhs, 1.0 / k, forms_.Mp.multiply(old.phi));
  vec_axpy_inplace(rhs, -theta, forms_.Ap.multiply(old.phi));

  const int order = config_.extrapolation_order;
  if (order == 2 && history.size() < 2)
    throw std::invalid_argument("decoupled step: order-2 extrapolation needs two states");
  const double tau = history.size() >= 2 ? k / history.last_step() : 1.0;
  const auto w = interface_extrapolation_weights(order, theta, tau);
  Vector u_star = old.u;
  for (double& v : u_star) v *= w[0];
  if (w[1] != 0.0) vec_axpy_inplace(u_star, w[1], history.back(1).u);
  vec_axpy_inplace(rhs, 1.0, forms_.Cg.multiply_transpose(u_star));

  out.phi = darcy_system(k).solve(rhs, forcing.phi_dirichlet);
}

State ThetaStepper::step_decoupled(const StateHistory& history, double k,
                                   const StepForcing& forcing) const {
  check_step_size(k);
  if (history.size() < 1) throw std::invalid_argument("step: empty history");
  State out;
  out.t = history.back(0).t + k;
  stokes_substep(history, k, forcing, out);
  darcy_substep(history, k, forcing, out);
  return out;
}

double ThetaStepper::divergence_residual(std::span<const double> u_new,
                                         std::span<const double> u_old) const {
  const double theta = config_.theta;
  const Vector mix = vec_combine(1.0 - theta, u_new, theta, u_old);
  return vec_inf_norm(forms_.B.multiply(mix));
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

FixedRunResult run_fixed(const TransientProblem& problem, ThetaConfig config,
                         Coupling coupling, bool filtered, double t0,
                         std::span<const double> step_sizes) {
  config.validate();
  if (step_sizes.size() < 2)
    throw std::invalid_argument("run_fixed: need at least two steps");

  ThetaStepper stepper(problem.forms(), problem.dirichlet(), config);
  FixedRunResult result;
  StateHistory history;

  // Bootstrap states at t0 and t0 + k0.
  history.push(problem.sample_state(t0));
  history.push(problem.sample_state(t0 + step_sizes[0]));
  result.trajectory.push_back(history.back(1));
  result.trajectory.push_back(history.back(0));

  const auto start = std::chrono::steady_clock::now();
  for (size_t m = 1; m < step_sizes.size(); ++m) {
    const double k = step_sizes[m];
    check_step_size(k);
    const double t_old = history.back(0).t;
    const StepForcing forcing = problem.forcing(t_old, t_old + k);
    State next = coupling == Coupling::Coupled
                     ? stepper.step_coupled(history, k, forcing)
                     : stepper.step_decoupled(history, k, forcing);
    if (filtered)
      next = filtered_state(next, history, config.theta, history.ratio(k));
    history.push(next);
    result.trajectory.push_back(std::move(next));
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

FixedRunResult run_fixed_dt(const TransientProblem& problem, ThetaConfig config,
                            Coupling coupling, bool filtered, double t0,
                            double dt, double T) {
  check_step_size(dt);
  std::vector<double> steps;
  double t = t0;
  const double tiny = 1e-12 * std::max(1.0, std::abs(T - t0));
  while (T - t > tiny) {
    // Clip the last step so the run lands on T exactly.
    const double k = (T - t < dt * (1.0 + 1e-9)) ? (T - t) : dt;
    steps.push_back(k);
    t += k;
  }
  if (steps.size() < 2)
    throw std::invalid_argument("run_fixed_dt: horizon shorter than two steps");
  return run_fixed(problem, config, coupling, filtered, t0, steps);
}

}  // namespace sd
