#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "sd/benchmarks.hpp"

namespace sdtest {

// Two uncoupled scalar ODEs dressed up as a velocity/head pair:
//   y' + lambda_u y = f_u(t),   z' + lambda_phi z = f_phi(t).
// No pressure DOFs and a zero interface block, so every stepper path works.
class ScalarOdeProblem final : public sd::TransientProblem {
 public:
  ScalarOdeProblem(double lambda_u, double lambda_phi,
                   std::function<double(double)> exact_u,
                   std::function<double(double)> exact_phi,
                   std::function<double(double)> load_u,
                   std::function<double(double)> load_phi)
      : exact_u_(std::move(exact_u)), exact_phi_(std::move(exact_phi)),
        load_u_(std::move(load_u)), load_phi_(std::move(load_phi)) {
    forms_.Mf = sd::SparseMatrix::identity(1);
    forms_.Af = sd::SparseMatrix::from_triplets(1, 1, {{0.0, 0.0, lambda_u}});
    forms_.B = sd::SparseMatrix(0, 1);
    forms_.Cg = sd::SparseMatrix(1, 1);  // stored-empty coupling block
    forms_.Mp = sd::SparseMatrix::identity(1);
    forms_.Ap = sd::SparseMatrix::from_triplets(1, 1, {{0.0, 0.0, lambda_phi}});
  }

  const sd::SystemForms& forms() const override { return forms_; }
  const sd::DirichletSpec& dirichlet() const override { return dirichlet_; }

  sd::StepForcing forcing(double t_old, double t_new) const override {
    sd::StepForcing f;
    f.load_u_old = {load_u_(t_old)};
    f.load_u_new = {load_u_(t_new)};
    f.load_phi_old = {load_phi_(t_old)};
    f.load_phi_new = {load_phi_(t_new)};
    return f;
  }

  sd::State sample_state(double t) const override {
    return {t, {exact_u_(t)}, {}, {exact_phi_(t)}};
  }

  const sd::SparseMatrix& norm_mass_u() const override { return forms_.Mf; }
  const sd::SparseMatrix& norm_mass_phi() const override { return forms_.Mp; }

 private:
  sd::SystemForms forms_;
  sd::DirichletSpec dirichlet_;
  std::function<double(double)> exact_u_, exact_phi_, load_u_, load_phi_;
};

// Decaying-to-equilibrium scalar pair with a known solution:
//   y(t) = a*exp(-lambda t) + c, both fields identical.
inline ScalarOdeProblem decay_problem(double lambda, double a, double c) {
  auto exact = [=](double t) { return a * std::exp(-lambda * t) + c; };
  auto load = [=](double t) {
    (void)t;
    return lambda * c;  // y' + lambda y = lambda c
  };
  return ScalarOdeProblem(lambda, lambda, exact, exact, load, load);
}

// A manufactured problem with every piece of time-dependent data frozen at
// t_star; its discrete steady solution is a fixed point of the scheme.
class FrozenProblem final : public sd::TransientProblem {
 public:
  FrozenProblem(const sd::ManufacturedProblem& base, double t_star)
      : base_(base), frozen_(base.forcing(t_star, t_star)) {}

  const sd::SystemForms& forms() const override { return base_.forms(); }
  const sd::DirichletSpec& dirichlet() const override { return base_.dirichlet(); }
  sd::StepForcing forcing(double, double) const override { return frozen_; }
  sd::State sample_state(double t) const override {
    sd::State s = base_.sample_state(t);
    s.t = t;
    return s;
  }
  const sd::SparseMatrix& norm_mass_u() const override {
    return base_.norm_mass_u();
  }
  const sd::SparseMatrix& norm_mass_phi() const override {
    return base_.norm_mass_phi();
  }

 private:
  const sd::ManufacturedProblem& base_;
  sd::StepForcing frozen_;
};

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng());
}

inline sd::Vector random_vector(size_t n, double lo = -1.0, double hi = 1.0) {
  sd::Vector v(n);
  for (auto& x : v) x = uniform(lo, hi);
  return v;
}

}  // namespace sdtest
