#pragma once

#include <array>
#include <functional>

#include "sd/fespace.hpp"
#include "sd/linalg.hpp"

namespace sd {

/// Fluid/porous material data. The slip coefficient on the interface is
/// alpha*nu*sqrt(d)/sqrt(trace(K*nu/g)) with d = 2.
struct PhysicalCoefficients {
  double nu = 1.0;
  double g = 1.0;
  double s0 = 1.0;
  std::array<std::array<double, 2>, 2> k{{{1.0, 0.0}, {0.0, 1.0}}};
  double alpha = 1.0;

  double bjs_coefficient() const;
  void validate() const;  // throws std::invalid_argument
};

/// Assembled operators of the semi-discrete system. Scalings are baked in:
/// Mp carries g*s0, Ap carries g, Cg carries g; Af contains the viscous
/// term plus the interface slip term.
struct SystemForms {
  SparseMatrix Mf;  // velocity mass
  SparseMatrix Af;  // viscous + slip stiffness
  SparseMatrix B;   // pressure rows x velocity cols, -(q, div v)
  SparseMatrix Cg;  // velocity rows x head cols, g*(psi, v.n_f) on the interface
  SparseMatrix Mp;  // head mass, scaled by g*s0
  SparseMatrix Ap;  // Darcy stiffness, scaled by g
};

using ScalarField = std::function<double(double x, double y)>;
using VectorField = std::function<std::array<double, 2>(double x, double y)>;

SparseMatrix assemble_mass(const FeSpace& space, double weight);
SparseMatrix assemble_stokes_stiffness(const FeSpace& velocity,
                                       const PhysicalCoefficients& coeffs,
                                       const TraceMap& trace);
SparseMatrix assemble_darcy_stiffness(const FeSpace& head,
                                      const PhysicalCoefficients& coeffs);
SparseMatrix assemble_divergence(const FeSpace& velocity,
                                 const FeSpace& pressure);
SparseMatrix assemble_interface_coupling(const FeSpace& velocity,
                                         const FeSpace& head,
                                         const TraceMap& trace, double g);

Vector assemble_load(const FeSpace& space, const ScalarField& forcing,
                     double weight);
Vector assemble_load(const FeSpace& space, const VectorField& forcing,
                     double weight);

/// Element-quadrature L2 norm of (discrete - exact) over the space's mesh.
double l2_error(const FeSpace& space, std::span<const double> dofs,
                const ScalarField& exact);
double l2_error(const FeSpace& space, std::span<const double> dofs,
                const VectorField& exact);
double l2_norm(const FeSpace& space, const ScalarField& f);
double l2_norm(const FeSpace& space, const VectorField& f);

/// Nodal interpolant: evaluates f at each DOF support point.
Vector interpolate(const FeSpace& space, const ScalarField& f);
Vector interpolate(const FeSpace& space, const VectorField& f);

/// sqrt(x' M x), the discrete L2 norm used for estimator magnitudes.
double mass_norm(const SparseMatrix& mass, std::span<const double> x);

}  // namespace sd
