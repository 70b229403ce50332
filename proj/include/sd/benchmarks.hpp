#pragma once

#include <functional>
#include <memory>
#include <string>

#include "sd/adaptivity.hpp"
#include "sd/stepping.hpp"

namespace sd {

/// A prescribed exact solution on a fluid/porous domain pair together with
/// the forcing that makes it solve the model with unit parameters.
struct ManufacturedCase {
  std::string name;
  Rect fluid, porous;
  std::function<std::array<double, 2>(double x, double y, double t)> velocity;
  std::function<double(double, double, double)> pressure;
  std::function<double(double, double, double)> head;
  std::function<std::array<double, 2>(double, double, double)> fluid_forcing;
  std::function<double(double, double, double)> porous_forcing;
};

const ManufacturedCase& test1_case();  // exponential-in-time, (0,pi) strip pair
const ManufacturedCase& test2_case();  // cos(t)-in-time, unit square pair

enum class ScheduleId { K1, K2, K3 };

/// Prescribed step-size rules of the stability study. K3 (and late K2) can
/// reach nonpositive sizes outside their intended horizon; that throws.
double schedule_step(ScheduleId id, int m, double t_m);
ScheduleId schedule_from_name(const std::string& name);

/// Subdivision count along the interface giving spacing ~1/h_den.
int interface_divisions(const ManufacturedCase& mc, int h_den);

/// Discretization of a manufactured case: meshes, spaces, operators, and
/// loads/boundary data evaluated from the exact solution.
class ManufacturedProblem final : public TransientProblem {
 public:
  ManufacturedProblem(const ManufacturedCase& mc, int h_den);

  const SystemForms& forms() const override { return forms_; }
  const DirichletSpec& dirichlet() const override { return dirichlet_; }
  StepForcing forcing(double t_old, double t_new) const override;
  State sample_state(double t) const override;
  const SparseMatrix& norm_mass_u() const override { return forms_.Mf; }
  const SparseMatrix& norm_mass_phi() const override { return mass_phi_; }
  const SparseMatrix& norm_mass_p() const { return mass_p_; }

  const ManufacturedCase& mcase() const { return *case_; }
  const FeSpace& velocity_space() const { return velocity_; }
  const FeSpace& pressure_space() const { return pressure_; }
  const FeSpace& head_space() const { return head_; }
  const CoupledMesh& coupled_mesh() const { return *mesh_; }
  int h_den() const { return h_den_; }

  struct VariableErrors {
    double u = 0.0, p = 0.0, phi = 0.0;
  };

  /// Final-time L2 errors against the exact solution.
  VariableErrors final_errors(const State& state) const;

  /// k-weighted accumulated relative errors over the trajectory from its
  /// third state on: sqrt(sum_i k_i * rel_i) as printed in the study, plus
  /// the RMS variant sqrt(sum_i k_i * rel_i^2).
  VariableErrors accumulated_errors(std::span<const State> trajectory) const;
  VariableErrors accumulated_errors_rms(std::span<const State> trajectory) const;

  /// Exact-solution L2 norms at time t (for stability ratios).
  VariableErrors exact_norms(double t) const;

 private:
  const ManufacturedCase* case_;
  int h_den_;
  std::unique_ptr<CoupledMesh> mesh_;
  FeSpace velocity_, pressure_, head_;
  TraceMap trace_;
  PhysicalCoefficients coeffs_;
  SystemForms forms_;
  SparseMatrix mass_phi_, mass_p_;
  DirichletSpec dirichlet_;
};

/// rho = ln(e1/e2) / ln(s1/s2).
double convergence_order(double e1, double e2, double s1, double s2);
/// Least-squares slope of ln(e) against ln(s).
double fit_order(std::span<const double> errors, std::span<const double> scales);

/// Dense fixed-step trajectory used to isolate the temporal error of
/// adaptive runs from the spatial discretization error: states on a uniform
/// grid, queried at arbitrary times by cubic interpolation per DOF.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory(const ManufacturedProblem& problem, double theta,
                      double t0, double T, int n_steps);
  State at(double t) const;

 private:
  double t0_, dt_;
  std::vector<State> states_;
};

struct TimeSweepPoint {
  double epsilon = 0.0;
  double avg_dt = 0.0;
  int n_steps = 0;
  int n_rejects = 0;
  double err_u = 0.0, err_p = 0.0, err_phi = 0.0;  // temporal, vs reference
  double seconds = 0.0;
  std::vector<StepLogRow> log;
};

std::vector<TimeSweepPoint> run_time_sweep(
    const ManufacturedProblem& problem, const ReferenceTrajectory& reference,
    ThetaConfig theta_config, Coupling coupling, bool filtered,
    std::span<const double> epsilons, double T, ControllerConfig base_config,
    int jobs);

/// Default bootstrap spacing for tolerance eps at the given order exponent.
double default_initial_step(double eps, double order_exponent);

struct SpaceSweepPoint {
  int h_den = 0;
  double err_u = 0.0, err_p = 0.0, err_phi = 0.0;  // final-time, vs exact
  double seconds = 0.0;
};

std::vector<SpaceSweepPoint> run_space_sweep(const ManufacturedCase& mc,
                                             ThetaConfig theta_config,
                                             Coupling coupling, bool filtered,
                                             double dt,
                                             std::span<const int> h_dens,
                                             double T, int jobs);

}  // namespace sd
