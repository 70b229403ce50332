#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "sd/assembly.hpp"
#include "sd/linalg.hpp"

namespace sd {

struct State {
  double t = 0.0;
  Vector u;    // fluid velocity DOFs
  Vector p;    // fluid pressure DOFs
  Vector phi;  // hydraulic head DOFs
};

/// Ring buffer of the most recent accepted states, newest last.
class StateHistory {
 public:
  static constexpr size_t capacity = 4;

  void push(State s);
  size_t size() const { return states_.size(); }
  // back(0) is the newest state, back(1) the one before it, ...
  const State& back(size_t age = 0) const { return states_[states_.size() - 1 - age]; }

  double last_step() const;              // t_m - t_{m-1}
  double step_before_last() const;       // t_{m-1} - t_{m-2}
  double ratio(double next_step) const { return next_step / last_step(); }

 private:
  std::deque<State> states_;
};

struct ThetaConfig {
  double theta = 0.3;          // strictly inside (0, 1/2)
  int extrapolation_order = 2;  // interface data in the decoupled split: 1 or 2

  void validate() const;
};

/// Constrained DOFs of the transient problem. Values are supplied per step
/// through StepForcing; the id sets are fixed for the problem's lifetime.
struct DirichletSpec {
  std::vector<int> u_dofs;    // sorted velocity DOFs (outer fluid boundary)
  std::vector<int> phi_dofs;  // sorted head DOFs (outer porous boundary)
  std::optional<int> pressure_pin;  // set when velocity is Dirichlet on the
                                    // whole fluid boundary
};

/// Data the stepper needs for one attempt from t_m to t_{m+1} = t_m + k.
struct StepForcing {
  Vector load_u_old, load_u_new;      // velocity loads at t_m, t_{m+1}
  Vector load_phi_old, load_phi_new;  // head loads (g-weighted) at t_m, t_{m+1}
  Vector u_dirichlet;                 // values at t_{m+1}, aligned with spec
  Vector phi_dirichlet;
  double pressure_pin_value = 0.0;
};

/// One step of the one-parameter multistep scheme, either as a monolithic
/// solve of both subdomains or as two independent subdomain solves with
/// extrapolated interface data. Factorizations are cached per step size.
class ThetaStepper {
 public:
  ThetaStepper(const SystemForms& forms, const DirichletSpec& dirichlet,
               ThetaConfig config);

  State step_coupled(const StateHistory& history, double k,
                     const StepForcing& forcing) const;
  State step_decoupled(const StateHistory& history, double k,
                       const StepForcing& forcing) const;

  // The two halves of the decoupled split; each reads only history.
  void stokes_substep(const StateHistory& history, double k,
                      const StepForcing& forcing, State& out) const;
  void darcy_substep(const StateHistory& history, double k,
                     const StepForcing& forcing, State& out) const;

  const ThetaConfig& config() const { return config_; }

  /// Max-norm of B((1-theta) u_new + theta u_old), the discrete
  /// incompressibility residual of an accepted step.
  double divergence_residual(std::span<const double> u_new,
                             std::span<const double> u_old) const;

 private:
  const SystemForms& forms_;
  DirichletSpec dirichlet_;
  ThetaConfig config_;
  int nu_, np_, nh_;
  SparseMatrix bt_;  // velocity rows x pressure cols

  struct Cache;
  std::shared_ptr<Cache> cache_;

  const ConstrainedSystem& coupled_system(double k) const;
  const ConstrainedSystem& stokes_system(double k) const;
  const ConstrainedSystem& darcy_system(double k) const;
};

/// Weights (on phi^m, phi^{m-1}) approximating the implicit interface datum
/// in the decoupled split: order 2 gives (1+(1-theta)tau, -(1-theta)tau),
/// order 1 gives (1, 0).
std::array<double, 2> interface_extrapolation_weights(int order, double theta,
                                                      double tau);

/// Pressure-row right-hand side -theta/(1-theta) * B u_m, scaled so the
/// constraint row solves for the provisional velocity directly.
Vector constraint_rhs(const SparseMatrix& b, std::span<const double> u_m,
                      double theta);

/// A transient problem the steppers and run loops can drive: assembled
/// operators, Dirichlet layout, per-time loads and boundary values, and
/// state sampling for bootstrapping.
class TransientProblem {
 public:
  virtual ~TransientProblem() = default;
  virtual const SystemForms& forms() const = 0;
  virtual const DirichletSpec& dirichlet() const = 0;
  virtual StepForcing forcing(double t_old, double t_new) const = 0;
  virtual State sample_state(double t) const = 0;
  // Mass operators defining the discrete L2 magnitude of estimator fields.
  virtual const SparseMatrix& norm_mass_u() const = 0;
  virtual const SparseMatrix& norm_mass_phi() const = 0;
};

enum class Coupling { Coupled, Decoupled };

struct FixedRunResult {
  std::vector<State> trajectory;  // includes the bootstrap states
  double seconds = 0.0;           // stepping loop wall clock
};

/// Fixed-step driver: bootstrap states at t0 and t0+k0 are sampled from the
/// problem, then steps follow the supplied size sequence. With `filtered`
/// the second-order filter is applied to every computed state.
FixedRunResult run_fixed(const TransientProblem& problem, ThetaConfig config,
                         Coupling coupling, bool filtered, double t0,
                         std::span<const double> step_sizes);

/// Convenience: constant step size until t reaches T (last step clipped).
FixedRunResult run_fixed_dt(const TransientProblem& problem, ThetaConfig config,
                            Coupling coupling, bool filtered, double t0,
                            double dt, double T);

}  // namespace sd
