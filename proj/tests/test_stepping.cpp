#include <doctest.h>

#include <cmath>

#include "sd/stepping.hpp"
#include "test_support.hpp"

using namespace sd;

namespace {

// Assembles and solves the stationary system at frozen data; its solution
// is a fixed point of any step size.
State steady_solution(const ManufacturedProblem& problem, double t_star) {
  const SystemForms& f = problem.forms();
  const SparseMatrix bt = f.B.transpose();
  const SparseMatrix cgt = f.Cg.transpose();
  BlockSystem bs;
  const int gu = bs.add_group("velocity", f.Mf.rows());
  const int gp = bs.add_group("pressure", f.B.rows());
  const int gh = bs.add_group("head", f.Mp.rows());
  bs.set_block(gu, gu, axpy_compose({{1.0, &f.Af}}));
  bs.set_block(gu, gp, axpy_compose({{1.0, &bt}}));
  bs.set_block(gu, gh, axpy_compose({{1.0, &f.Cg}}));
  bs.set_block(gp, gu, axpy_compose({{1.0, &f.B}}));
  bs.set_block(gh, gu, axpy_compose({{-1.0, &cgt}}));
  bs.set_block(gh, gh, axpy_compose({{1.0, &f.Ap}}));

  const StepForcing forcing = problem.forcing(t_star, t_star);
  const DirichletSpec& dir = problem.dirichlet();
  Vector rhs(bs.total_size(), 0.0);
  std::copy(forcing.load_u_new.begin(), forcing.load_u_new.end(), rhs.begin());
  std::copy(forcing.load_phi_new.begin(), forcing.load_phi_new.end(),
            rhs.begin() + bs.offset(gh));

  std::vector<int> constrained = dir.u_dofs;
  Vector values = forcing.u_dirichlet;
  for (int d : dir.phi_dofs) constrained.push_back(bs.offset(gh) + d);
  values.insert(values.end(), forcing.phi_dirichlet.begin(),
                forcing.phi_dirichlet.end());

  const ConstrainedSystem sys(bs.flatten(), constrained);
  const Vector x = sys.solve(rhs, values);
  State s;
  s.t = t_star;
  s.u.assign(x.begin(), x.begin() + f.Mf.rows());
  s.p.assign(x.begin() + bs.offset(gp), x.begin() + bs.offset(gh));
  s.phi.assign(x.begin() + bs.offset(gh), x.end());
  return s;
}

double max_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("theta config validation") {
  ThetaConfig cfg;
  cfg.theta = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.theta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.theta = 0.3;
  cfg.extrapolation_order = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("scalar step matches the closed form") {
  const double lambda = 2.3, theta = 0.3, k = 0.05;
  const double y = 1.7, f_old = 0.4, f_new = 0.9;
  sdtest::ScalarOdeProblem problem(
      lambda, lambda, [](double) { return 0.0; }, [](double) { return 0.0; },
      [&](double t) { return t == 0.0 ? f_old : f_new; },
      [&](double t) { return t == 0.0 ? f_old : f_new; });

  ThetaConfig cfg;
  cfg.theta = theta;
  ThetaStepper stepper(problem.forms(), problem.dirichlet(), cfg);
  StateHistory history;
  history.push({0.0, {y}, {}, {y}});
  const State out = stepper.step_coupled(history, k, problem.forcing(0.0, k));

  const double fbar = (1.0 - theta) * f_new + theta * f_old;
  const double want =
      (y - k * theta * lambda * y + k * fbar) / (1.0 + k * (1.0 - theta) * lambda);
  CHECK(out.u[0] == doctest::Approx(want).epsilon(1e-14));
  CHECK(out.phi[0] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("interface extrapolation weights") {
  const auto w2 = interface_extrapolation_weights(2, 0.3, 1.0);
  CHECK(w2[0] == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(w2[1] == doctest::Approx(-0.7).epsilon(1e-15));
  const auto w1 = interface_extrapolation_weights(1, 0.3, 1.0);
  CHECK(w1[0] == 1.0);
  CHECK(w1[1] == 0.0);
}

TEST_CASE("constraint right-hand side") {
  const SparseMatrix b2 = SparseMatrix::identity(2);
  const Vector u{1.0, 0.0};  // B u = e1
  const Vector r = constraint_rhs(b2, u, 0.3);
  CHECK(r[0] == doctest::Approx(-3.0 / 7.0).epsilon(1e-15));
  CHECK(r[1] == 0.0);

  const Vector r0 = constraint_rhs(b2, u, 1e-16);
  CHECK(std::abs(r0[0]) <= 1e-15);

  // Discretely divergence-free data gives a zero right-hand side.
  const CoupledMesh cm = build_coupled_mesh({0, 1, 1, 2}, {0, 1, 0, 1}, 3);
  const FeSpace vel = build_space(cm.fluid, ElementKind::P2, 2);
  const FeSpace prs = build_space(cm.fluid, ElementKind::P1, 1);
  const SparseMatrix b = assemble_divergence(vel, prs);
  const Vector uc = interpolate(vel, VectorField([](double, double) {
                                  return std::array<double, 2>{0.4, -1.1};
                                }));
  CHECK(vec_inf_norm(constraint_rhs(b, uc, 0.3)) <= 1e-13);
}

TEST_CASE("steady data is a fixed point of the coupled step") {
  const ManufacturedProblem base(test2_case(), 4);
  sdtest::FrozenProblem frozen(base, 0.4);
  const State steady = steady_solution(base, 0.4);

  ThetaConfig cfg;
  cfg.theta = 0.3;
  ThetaStepper stepper(frozen.forms(), frozen.dirichlet(), cfg);
  StateHistory history;
  history.push(steady);
  const State next =
      stepper.step_coupled(history, 0.05, frozen.forcing(0.4, 0.45));
  CHECK(max_diff(next.u, steady.u) <= 1e-8);
  CHECK(max_diff(next.p, steady.p) <= 1e-8);
  CHECK(max_diff(next.phi, steady.phi) <= 1e-8);
}

TEST_CASE("decoupled and coupled steps agree on steady data") {
  const ManufacturedProblem base(test2_case(), 4);
  sdtest::FrozenProblem frozen(base, 0.4);
  const State steady = steady_solution(base, 0.4);

  ThetaConfig cfg;
  cfg.theta = 0.3;
  cfg.extrapolation_order = 2;
  ThetaStepper stepper(frozen.forms(), frozen.dirichlet(), cfg);
  StateHistory history;
  State earlier = steady;
  earlier.t = 0.35;
  history.push(earlier);
  history.push(steady);

  const StepForcing forcing = frozen.forcing(0.4, 0.45);
  const State coupled = stepper.step_coupled(history, 0.05, forcing);
  const State decoupled = stepper.step_decoupled(history, 0.05, forcing);
  CHECK(max_diff(coupled.u, decoupled.u) <= 1e-7);
  CHECK(max_diff(coupled.p, decoupled.p) <= 1e-7);
  CHECK(max_diff(coupled.phi, decoupled.phi) <= 1e-7);
}

TEST_CASE("vanishing theta matches an independent backward Euler solve") {
  const ManufacturedProblem problem(test2_case(), 4);
  const SystemForms& f = problem.forms();
  const double t = 0.2, k = 0.05;
  const State start = problem.sample_state(t);

  ThetaConfig cfg;
  cfg.theta = 1e-12;
  ThetaStepper stepper(f, problem.dirichlet(), cfg);
  StateHistory history;
  history.push(start);
  const StepForcing forcing = problem.forcing(t, t + k);
  const State theta_step = stepper.step_coupled(history, k, forcing);

  // Independent oracle: fully implicit system assembled from scratch.
  const SparseMatrix bt = f.B.transpose();
  const SparseMatrix cgt = f.Cg.transpose();
  const SparseMatrix muk = axpy_compose({{1.0 / k, &f.Mf}, {1.0, &f.Af}});
  const SparseMatrix mpk = axpy_compose({{1.0 / k, &f.Mp}, {1.0, &f.Ap}});
  BlockSystem bs;
  const int gu = bs.add_group("velocity", f.Mf.rows());
  const int gp = bs.add_group("pressure", f.B.rows());
  const int gh = bs.add_group("head", f.Mp.rows());
  bs.set_block(gu, gu, axpy_compose({{1.0, &muk}}));
  bs.set_block(gu, gp, axpy_compose({{1.0, &bt}}));
  bs.set_block(gu, gh, axpy_compose({{1.0, &f.Cg}}));
  bs.set_block(gp, gu, axpy_compose({{1.0, &f.B}}));
  bs.set_block(gh, gu, axpy_compose({{-1.0, &cgt}}));
  bs.set_block(gh, gh, axpy_compose({{1.0, &mpk}}));

  Vector rhs(bs.total_size(), 0.0);
  {
    Vector ru = forcing.load_u_new;
    vec_axpy_inplace(ru, 1.0 / k, f.Mf.multiply(start.u));
    Vector rphi = forcing.load_phi_new;
    vec_axpy_inplace(rphi, 1.0 / k, f.Mp.multiply(start.phi));
    std::copy(ru.begin(), ru.end(), rhs.begin());
    std::copy(rphi.begin(), rphi.end(), rhs.begin() + bs.offset(gh));
  }
  std::vector<int> constrained = problem.dirichlet().u_dofs;
  Vector values = forcing.u_dirichlet;
  for (int d : problem.dirichlet().phi_dofs)
    constrained.push_back(bs.offset(gh) + d);
  values.insert(values.end(), forcing.phi_dirichlet.begin(),
                forcing.phi_dirichlet.end());
  const ConstrainedSystem sys(bs.flatten(), constrained);
  const Vector x = sys.solve(rhs, values);
  const Vector be_u(x.begin(), x.begin() + f.Mf.rows());
  const Vector be_p(x.begin() + bs.offset(gp), x.begin() + bs.offset(gh));
  const Vector be_phi(x.begin() + bs.offset(gh), x.end());

  CHECK(max_diff(theta_step.u, be_u) <= 1e-6);
  CHECK(max_diff(theta_step.p, be_p) <= 1e-6);
  CHECK(max_diff(theta_step.phi, be_phi) <= 1e-6);
}

TEST_CASE("coupled steps keep the discrete constraint") {
  const ManufacturedProblem problem(test2_case(), 4);
  ThetaConfig cfg;
  cfg.theta = 0.3;
  ThetaStepper stepper(problem.forms(), problem.dirichlet(), cfg);
  StateHistory history;
  history.push(problem.sample_state(0.0));
  for (int m = 0; m < 5; ++m) {
    const double t = history.back(0).t;
    const double k = 0.02;
    const State next =
        stepper.step_coupled(history, k, problem.forcing(t, t + k));
    CHECK(stepper.divergence_residual(next.u, history.back(0).u) <= 1e-8);
    history.push(next);
  }
}

TEST_CASE("time-shifted data shifts the trajectory and nothing else") {
  auto exact = [](double t) { return std::sin(t) + 2.0; };
  auto load = [&](double t) { return std::cos(t) + 1.5 * exact(t); };
  const double shift = 0.5;  // dyadic so shifted times subtract exactly
  sdtest::ScalarOdeProblem base(1.5, 1.5, exact, exact, load, load);
  sdtest::ScalarOdeProblem shifted(
      1.5, 1.5, [&](double t) { return exact(t - shift); },
      [&](double t) { return exact(t - shift); },
      [&](double t) { return load(t - shift); },
      [&](double t) { return load(t - shift); });

  ThetaConfig cfg;
  cfg.theta = 0.25;
  const std::vector<double> ks{0.25, 0.125, 0.25, 0.0625};
  const auto a = run_fixed(base, cfg, Coupling::Coupled, true, 0.0, ks);
  const auto b = run_fixed(shifted, cfg, Coupling::Coupled, true, shift, ks);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(b.trajectory[i].t == a.trajectory[i].t + shift);
    CHECK(b.trajectory[i].u[0] == a.trajectory[i].u[0]);
    CHECK(b.trajectory[i].phi[0] == a.trajectory[i].phi[0]);
  }
}

TEST_CASE("decoupled substeps are order independent") {
  const ManufacturedProblem problem(test2_case(), 3);
  ThetaConfig cfg;
  cfg.theta = 0.3;
  cfg.extrapolation_order = 2;
  ThetaStepper stepper(problem.forms(), problem.dirichlet(), cfg);
  StateHistory history;
  history.push(problem.sample_state(0.0));
  history.push(problem.sample_state(0.05));
  const StepForcing forcing = problem.forcing(0.05, 0.1);

  State stokes_first, darcy_first;
  stokes_first.t = darcy_first.t = 0.1;
  stepper.stokes_substep(history, 0.05, forcing, stokes_first);
  stepper.darcy_substep(history, 0.05, forcing, stokes_first);
  stepper.darcy_substep(history, 0.05, forcing, darcy_first);
  stepper.stokes_substep(history, 0.05, forcing, darcy_first);

  CHECK(stokes_first.u == darcy_first.u);
  CHECK(stokes_first.p == darcy_first.p);
  CHECK(stokes_first.phi == darcy_first.phi);
}

TEST_CASE("step size validation") {
  sdtest::ScalarOdeProblem problem(
      1.0, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; }, [](double) { return 0.0; });
  ThetaConfig cfg;
  ThetaStepper stepper(problem.forms(), problem.dirichlet(), cfg);
  StateHistory history;
  history.push({0.0, {1.0}, {}, {1.0}});
  CHECK_THROWS_AS(stepper.step_coupled(history, 0.0, problem.forcing(0, 0.1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(stepper.step_coupled(history, -0.1, problem.forcing(0, 0.1)),
                  std::invalid_argument);
  // Order-2 interface extrapolation needs two history states.
  CHECK_THROWS_AS(stepper.step_decoupled(history, 0.1, problem.forcing(0, 0.1)),
                  std::invalid_argument);
}
