#include "sd/benchmarks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace sd {

namespace {
constexpr double pi = std::numbers::pi;
}

const ManufacturedCase& test1_case() {
  static const ManufacturedCase mc = [] {
    ManufacturedCase c;
    c.name = "test1";
    c.fluid = {0.0, pi, 0.0, 1.0};
    c.porous = {0.0, pi, -1.0, 0.0};
    c.velocity = [](double x, double y, double t) -> std::array<double, 2> {
      const double et = std::exp(t);
      return {std::sin(2.0 * pi * y) * std::cos(x) * et / pi,
              (-2.0 + std::pow(std::sin(pi * y), 2) / (pi * pi)) * std::sin(x) * et};
    };
    c.pressure = [](double, double, double) { return 0.0; };
    c.head = [](double x, double y, double t) {
      return (std::exp(y) - std::exp(-y)) * std::sin(x) * std::exp(t);
    };
    // With unit parameters: g_f = u_t - lap(u), g_p = phi_t - lap(phi).
    c.fluid_forcing = [](double x, double y, double t) -> std::array<double, 2> {
      const double et = std::exp(t);
      const double u1 = std::sin(2.0 * pi * y) * std::cos(x) * et / pi;
      const double u2 =
          (-2.0 + std::pow(std::sin(pi * y), 2) / (pi * pi)) * std::sin(x) * et;
      return {(2.0 + 4.0 * pi * pi) * u1,
              2.0 * u2 - 2.0 * std::cos(2.0 * pi * y) * std::sin(x) * et};
    };
    c.porous_forcing = [](double x, double y, double t) {
      // The head is harmonic, so only the time derivative survives.
      return (std::exp(y) - std::exp(-y)) * std::sin(x) * std::exp(t);
    };
    return c;
  }();
  return mc;
}

const ManufacturedCase& test2_case() {
  static const ManufacturedCase mc = [] {
    ManufacturedCase c;
    c.name = "test2";
    c.fluid = {0.0, 1.0, 1.0, 2.0};
    c.porous = {0.0, 1.0, 0.0, 1.0};
    c.velocity = [](double x, double y, double t) -> std::array<double, 2> {
      const double ct = std::cos(t);
      return {(x * x * (y - 1.0) * (y - 1.0) + y) * ct,
              (-2.0 / 3.0 * x * std::pow(y - 1.0, 3) +
               (2.0 - pi * std::sin(pi * x))) *
                  ct};
    };
    c.pressure = [](double x, double y, double t) {
      return (2.0 - pi * std::sin(pi * x)) * std::sin(0.5 * pi * y) * std::cos(t);
    };
    c.head = [](double x, double y, double t) {
      return (2.0 - pi * std::sin(pi * x)) * (1.0 - y - std::cos(pi * y)) *
             std::cos(t);
    };
    c.fluid_forcing = [](double x, double y, double t) -> std::array<double, 2> {
      const double ct = std::cos(t), st = std::sin(t);
      const double ym = y - 1.0;
      const double f1 = -(x * x * ym * ym + y) * st -
                        (2.0 * ym * ym + 2.0 * x * x) * ct -
                        pi * pi * std::cos(pi * x) * std::sin(0.5 * pi * y) * ct;
      const double f2 =
          -(-2.0 / 3.0 * x * ym * ym * ym + 2.0 - pi * std::sin(pi * x)) * st -
          (pi * pi * pi * std::sin(pi * x) - 4.0 * x * ym) * ct +
          0.5 * pi * (2.0 - pi * std::sin(pi * x)) * std::cos(0.5 * pi * y) * ct;
      return {f1, f2};
    };
    c.porous_forcing = [](double x, double y, double t) {
      const double ct = std::cos(t), st = std::sin(t);
      const double q = 2.0 - pi * std::sin(pi * x);
      const double w = 1.0 - y - std::cos(pi * y);
      return -q * w * st -
             (pi * pi * pi * std::sin(pi * x) * w + pi * pi * q * std::cos(pi * y)) *
                 ct;
    };
    return c;
  }();
  return mc;
}

double schedule_step(ScheduleId id, int m, double t_m) {
  if (m < 0) throw std::invalid_argument("schedule_step: m must be nonnegative");
  double k = 0.0;
  switch (id) {
    case ScheduleId::K1: k = 0.01 + 0.05 * t_m; break;
    case ScheduleId::K2:
      k = m <= 10 ? 0.01 : 0.01 + 0.05 * std::sin(10.0 * t_m);
      break;
    case ScheduleId::K3: k = 0.1 - 0.05 * t_m; break;
  }
  if (!(k > 0.0))
    throw std::invalid_argument("schedule_step: nonpositive step size at t_m=" +
                                std::to_string(t_m));
  return k;
}

ScheduleId schedule_from_name(const std::string& name) {
  if (name == "k1") return ScheduleId::K1;
  if (name == "k2") return ScheduleId::K2;
  if (name == "k3") return ScheduleId::K3;
  throw std::invalid_argument("unknown schedule: " + name);
}

int interface_divisions(const ManufacturedCase& mc, int h_den) {
  if (h_den < 1) throw std::invalid_argument("mesh density must be positive");
  return std::max(1, static_cast<int>(std::llround(mc.fluid.width() * h_den)));
}

ManufacturedProblem::ManufacturedProblem(const ManufacturedCase& mc, int h_den)
    : case_(&mc), h_den_(h_den) {
  mesh_ = std::make_unique<CoupledMesh>(
      build_coupled_mesh(mc.fluid, mc.porous, interface_divisions(mc, h_den)));
  velocity_ = build_space(mesh_->fluid, ElementKind::P2, 2);
  pressure_ = build_space(mesh_->fluid, ElementKind::P1, 1);
  head_ = build_space(mesh_->porous, ElementKind::P2, 1);
  trace_ = build_trace_map(velocity_, head_, *mesh_);

  forms_.Mf = assemble_mass(velocity_, 1.0);
  forms_.Af = assemble_stokes_stiffness(velocity_, coeffs_, trace_);
  forms_.B = assemble_divergence(velocity_, pressure_);
  forms_.Cg = assemble_interface_coupling(velocity_, head_, trace_, coeffs_.g);
  forms_.Mp = assemble_mass(head_, coeffs_.g * coeffs_.s0);
  forms_.Ap = assemble_darcy_stiffness(head_, coeffs_);
  mass_phi_ = assemble_mass(head_, 1.0);
  mass_p_ = assemble_mass(pressure_, 1.0);

  dirichlet_.u_dofs = dirichlet_dofs(velocity_, BoundaryTag::FluidOuter);
  dirichlet_.phi_dofs = dirichlet_dofs(head_, BoundaryTag::PorousOuter);

  // The pressure is determined through the interface terms whenever some
  // fluid-boundary velocity DOF stays free; pin one DOF otherwise.
  std::vector<int> boundary = dirichlet_dofs(velocity_, BoundaryTag::FluidOuter);
  std::vector<int> on_interface = dirichlet_dofs(velocity_, BoundaryTag::Interface);
  std::vector<int> all_boundary;
  std::merge(boundary.begin(), boundary.end(), on_interface.begin(),
             on_interface.end(), std::back_inserter(all_boundary));
  all_boundary.erase(std::unique(all_boundary.begin(), all_boundary.end()),
                     all_boundary.end());
  if (all_boundary.size() == dirichlet_.u_dofs.size()) dirichlet_.pressure_pin = 0;
}

StepForcing ManufacturedProblem::forcing(double t_old, double t_new) const {
  StepForcing f;
  auto gf = [this](double t) {
    return assemble_load(
        velocity_,
        VectorField([this, t](double x, double y) {
          return case_->fluid_forcing(x, y, t);
        }),
        1.0);
  };
  auto gp = [this](double t) {
    return assemble_load(head_,
                         ScalarField([this, t](double x, double y) {
                           return case_->porous_forcing(x, y, t);
                         }),
                         coeffs_.g);
  };
  f.load_u_old = gf(t_old);
  f.load_u_new = gf(t_new);
  f.load_phi_old = gp(t_old);
  f.load_phi_new = gp(t_new);

  f.u_dirichlet.resize(dirichlet_.u_dofs.size());
  for (size_t i = 0; i < dirichlet_.u_dofs.size(); ++i) {
    const int g = dirichlet_.u_dofs[i];
    const int scalar = g / 2, comp = g % 2;
    const Point& xy = velocity_.dof_coords[scalar];
    f.u_dirichlet[i] = case_->velocity(xy[0], xy[1], t_new)[comp];
  }
  f.phi_dirichlet.resize(dirichlet_.phi_dofs.size());
  for (size_t i = 0; i < dirichlet_.phi_dofs.size(); ++i) {
    const Point& xy = head_.dof_coords[dirichlet_.phi_dofs[i]];
    f.phi_dirichlet[i] = case_->head(xy[0], xy[1], t_new);
  }
  if (dirichlet_.pressure_pin) {
    const Point& xy = pressure_.dof_coords[*dirichlet_.pressure_pin];
    f.pressure_pin_value = case_->pressure(xy[0], xy[1], t_new);
  }
  return f;
}

State ManufacturedProblem::sample_state(double t) const {
  State s;
  s.t = t;
  s.u = interpolate(velocity_, VectorField([this, t](double x, double y) {
                      return case_->velocity(x, y, t);
                    }));
  s.p = interpolate(pressure_, ScalarField([this, t](double x, double y) {
                      return case_->pressure(x, y, t);
                    }));
  s.phi = interpolate(head_, ScalarField([this, t](double x, double y) {
                        return case_->head(x, y, t);
                      }));
  return s;
}

ManufacturedProblem::VariableErrors ManufacturedProblem::final_errors(
    const State& state) const {
  const double t = state.t;
  VariableErrors e;
  e.u = l2_error(velocity_, state.u, VectorField([this, t](double x, double y) {
                   return case_->velocity(x, y, t);
                 }));
  e.p = l2_error(pressure_, state.p, ScalarField([this, t](double x, double y) {
                   return case_->pressure(x, y, t);
                 }));
  e.phi = l2_error(head_, state.phi, ScalarField([this, t](double x, double y) {
                     return case_->head(x, y, t);
                   }));
  return e;
}

namespace {

ManufacturedProblem::VariableErrors accumulate(
    const ManufacturedProblem& problem, std::span<const State> trajectory,
    bool square_terms) {
  if (trajectory.size() < 3)
    throw std::invalid_argument("accumulated_errors: trajectory too short");
  ManufacturedProblem::VariableErrors acc;
  for (size_t i = 2; i < trajectory.size(); ++i) {
    const double k = trajectory[i].t - trajectory[i - 1].t;
    const auto err = problem.final_errors(trajectory[i]);
    const auto nrm = problem.exact_norms(trajectory[i].t);
    auto add = [&](double& a, double e, double n) {
      const double rel = n > 0.0 ? e / n : e;
      a += k * (square_terms ? rel * rel : rel);
    };
    add(acc.u, err.u, nrm.u);
    add(acc.p, err.p, nrm.p);
    add(acc.phi, err.phi, nrm.phi);
  }
  acc.u = std::sqrt(acc.u);
  acc.p = std::sqrt(acc.p);
  acc.phi = std::sqrt(acc.phi);
  return acc;
}

}  // namespace

ManufacturedProblem::VariableErrors ManufacturedProblem::accumulated_errors(
    std::span<const State> trajectory) const {
  return accumulate(*this, trajectory, false);
}

ManufacturedProblem::VariableErrors ManufacturedProblem::accumulated_errors_rms(
    std::span<const State> trajectory) const {
  return accumulate(*this, trajectory, true);
}

ManufacturedProblem::VariableErrors ManufacturedProblem::exact_norms(
    double t) const {
  VariableErrors n;
  n.u = l2_norm(velocity_, VectorField([this, t](double x, double y) {
                  return case_->velocity(x, y, t);
                }));
  n.p = l2_norm(pressure_, ScalarField([this, t](double x, double y) {
                  return case_->pressure(x, y, t);
                }));
  n.phi = l2_norm(head_, ScalarField([this, t](double x, double y) {
                    return case_->head(x, y, t);
                  }));
  return n;
}

double convergence_order(double e1, double e2, double s1, double s2) {
  if (!(e1 > 0) || !(e2 > 0) || !(s1 > 0) || !(s2 > 0) || s1 == s2)
    throw std::invalid_argument("convergence_order: need positive inputs, s1 != s2");
  return std::log(e1 / e2) / std::log(s1 / s2);
}

double fit_order(std::span<const double> errors, std::span<const double> scales) {
  if (errors.size() != scales.size() || errors.size() < 2)
    throw std::invalid_argument("fit_order: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(errors.size());
  for (size_t i = 0; i < errors.size(); ++i) {
    const double x = std::log(scales[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ReferenceTrajectory::ReferenceTrajectory(const ManufacturedProblem& problem,
                                         double theta, double t0, double T,
                                         int n_steps) {
  if (n_steps < 8)
    throw std::invalid_argument("ReferenceTrajectory: too few steps");
  t0_ = t0;
  dt_ = (T - t0) / n_steps;
  ThetaConfig cfg;
  cfg.theta = theta;
  auto run = run_fixed_dt(problem, cfg, Coupling::Coupled, /*filtered=*/true, t0,
                          dt_, T);
  states_ = std::move(run.trajectory);
  // The fixed-step grid is uniform by construction; keep that invariant.
  for (size_t i = 0; i + 1 < states_.size(); ++i)
    if (std::abs(states_[i + 1].t - states_[i].t - dt_) > 1e-9 * std::max(1.0, dt_))
      throw std::logic_error("ReferenceTrajectory: nonuniform grid");
}

State ReferenceTrajectory::at(double t) const {
  const int n = static_cast<int>(states_.size());
  // Cubic Lagrange over the four grid states around t.
  int i0 = static_cast<int>(std::floor((t - t0_) / dt_)) - 1;
  i0 = std::clamp(i0, 0, n - 4);
  std::array<double, 4> w;
  for (int a = 0; a < 4; ++a) {
    w[a] = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      w[a] *= (t - states_[i0 + b].t) / (states_[i0 + a].t - states_[i0 + b].t);
    }
  }
  State out;
  out.t = t;
  auto blend = [&](auto member) {
    const Vector& first = states_[i0].*member;
    Vector v(first.size(), 0.0);
    for (int a = 0; a < 4; ++a) {
      const Vector& s = states_[i0 + a].*member;
      for (size_t d = 0; d < v.size(); ++d) v[d] += w[a] * s[d];
    }
    return v;
  };
  out.u = blend(&State::u);
  out.p = blend(&State::p);
  out.phi = blend(&State::phi);
  return out;
}

double default_initial_step(double eps, double order_exponent) {
  return 0.5 * std::pow(eps, order_exponent);
}

namespace {

void parallel_for_index(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<TimeSweepPoint> run_time_sweep(
    const ManufacturedProblem& problem, const ReferenceTrajectory& reference,
    ThetaConfig theta_config, Coupling coupling, bool filtered,
    std::span<const double> epsilons, double T, ControllerConfig base_config,
    int jobs) {
  std::vector<TimeSweepPoint> points(epsilons.size());
  const SparseMatrix& mu = problem.norm_mass_u();
  const SparseMatrix& mp = problem.norm_mass_p();
  const SparseMatrix& mphi = problem.norm_mass_phi();

  parallel_for_index(static_cast<int>(epsilons.size()), jobs, [&](int idx) {
    ControllerConfig cfg = base_config;
    cfg.epsilon = epsilons[idx];
    cfg.order_exponent = filtered ? 1.0 / 3.0 : 0.5;
    const double k0 = default_initial_step(cfg.epsilon, cfg.order_exponent);

    auto run = run_adaptive(problem, theta_config, coupling, filtered, cfg, 0.0,
                            k0, T);

    TimeSweepPoint& pt = points[idx];
    pt.epsilon = cfg.epsilon;
    pt.n_steps = static_cast<int>(run.trajectory.size()) - 1;
    pt.n_rejects = run.rejections;
    pt.avg_dt = T / pt.n_steps;
    pt.seconds = run.seconds;
    pt.log = std::move(run.log);

    // Temporal error: k-weighted RMS of relative deviations from the dense
    // same-mesh reference, which removes the shared spatial error.
    double su = 0, sp = 0, sphi = 0;
    for (size_t i = 2; i < run.trajectory.size(); ++i) {
      const State& s = run.trajectory[i];
      const double k = s.t - run.trajectory[i - 1].t;
      const State ref = reference.at(s.t);
      auto rel = [&](const SparseMatrix& m, const Vector& a, const Vector& b) {
        const Vector d = vec_combine(1.0, a, -1.0, b);
        const double den = mass_norm(m, b);
        return den > 0 ? mass_norm(m, d) / den : mass_norm(m, d);
      };
      const double ru = rel(mu, s.u, ref.u);
      const double rp = rel(mp, s.p, ref.p);
      const double rphi = rel(mphi, s.phi, ref.phi);
      su += k * ru * ru;
      sp += k * rp * rp;
      sphi += k * rphi * rphi;
    }
    pt.err_u = std::sqrt(su);
    pt.err_p = std::sqrt(sp);
    pt.err_phi = std::sqrt(sphi);
  });
  return points;
}

std::vector<SpaceSweepPoint> run_space_sweep(const ManufacturedCase& mc,
                                             ThetaConfig theta_config,
                                             Coupling coupling, bool filtered,
                                             double dt,
                                             std::span<const int> h_dens,
                                             double T, int jobs) {
  std::vector<SpaceSweepPoint> points(h_dens.size());
  parallel_for_index(static_cast<int>(h_dens.size()), jobs, [&](int idx) {
    ManufacturedProblem problem(mc, h_dens[idx]);
    auto run = run_fixed_dt(problem, theta_config, coupling, filtered, 0.0, dt, T);
    const auto err = problem.final_errors(run.trajectory.back());
    points[idx] = {h_dens[idx], err.u, err.p, err.phi, run.seconds};
  });
  return points;
}

}  // namespace sd
