#include "sd/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "sd/quadrature.hpp"

namespace sd {

double PhysicalCoefficients::bjs_coefficient() const {
  const double trace_pi = (k[0][0] + k[1][1]) * nu / g;
  return alpha * nu * std::sqrt(2.0) / std::sqrt(trace_pi);
}

void PhysicalCoefficients::validate() const {
  if (!(nu > 0) || !(g > 0) || !(s0 > 0) || !(alpha > 0))
    throw std::invalid_argument("physical coefficients must be positive");
  if (k[0][1] != k[1][0])
    throw std::invalid_argument("conductivity tensor must be symmetric");
  const double tr = k[0][0] + k[1][1];
  const double det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
  if (!(tr > 0) || !(det > 0))
    throw std::invalid_argument("conductivity tensor must be positive definite");
}

namespace {

struct ElementGeometry {
  std::array<double, 2> p0;
  double j00, j01, j10, j11;  // [p1-p0, p2-p0]
  double detj;
  double i00, i01, i10, i11;  // inverse transpose of J / detj applied to grads

  explicit ElementGeometry(const Mesh& mesh, const std::array<int, 3>& tri) {
    const Point& a = mesh.nodes[tri[0]];
    const Point& b = mesh.nodes[tri[1]];
    const Point& c = mesh.nodes[tri[2]];
    p0 = a;
    j00 = b[0] - a[0];
    j10 = b[1] - a[1];
    j01 = c[0] - a[0];
    j11 = c[1] - a[1];
    detj = j00 * j11 - j01 * j10;
    // rows of J^{-1}: used to push reference gradients to physical space
    i00 = j11 / detj;
    i01 = -j01 / detj;
    i10 = -j10 / detj;
    i11 = j00 / detj;
  }

  std::array<double, 2> map(double l1, double l2) const {
    return {p0[0] + j00 * l1 + j01 * l2, p0[1] + j10 * l1 + j11 * l2};
  }
  std::array<double, 2> grad(const std::array<double, 2>& ref) const {
    return {ref[0] * i00 + ref[1] * i10, ref[0] * i01 + ref[1] * i11};
  }
};

// Trace of the P2 basis along an edge, as 1D quadratics at s in [0,1]
// for the local order (left endpoint, midpoint, right endpoint).
std::array<double, 3> edge_basis(double s) {
  return {(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)};
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& space, double weight) {
  const auto& rule = triangle_rule_deg4();
  const int nl = space.local_size;
  std::vector<std::array<double, 3>> trips;
  double values[6];
  for (size_t t = 0; t < space.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*space.mesh, space.mesh->triangles[t]);
    double local[6][6] = {};
    for (int q = 0; q < TriangleRule::size; ++q) {
      eval_basis(space.kind, rule.l1[q], rule.l2[q], values);
      const double w = rule.w[q] * geom.detj * weight;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) local[i][j] += w * values[i] * values[j];
    }
    const auto& ed = space.element_dofs[t];
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        for (int c = 0; c < space.components; ++c)
          trips.push_back({double(space.global_of(ed[i], c)),
                           double(space.global_of(ed[j], c)), local[i][j]});
  }
  return SparseMatrix::from_triplets(space.dof_count, space.dof_count,
                                     std::move(trips));
}

namespace {

// K-weighted gradient stiffness shared by the viscous and Darcy terms.
void add_stiffness_triplets(const FeSpace& space,
                            const std::array<std::array<double, 2>, 2>& k,
                            double weight,
                            std::vector<std::array<double, 3>>& trips) {
  const auto& rule = triangle_rule_deg4();
  const int nl = space.local_size;
  std::array<double, 2> ref[6];
  for (size_t t = 0; t < space.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*space.mesh, space.mesh->triangles[t]);
    double local[6][6] = {};
    for (int q = 0; q < TriangleRule::size; ++q) {
      eval_basis_grad(space.kind, rule.l1[q], rule.l2[q], ref);
      std::array<double, 2> g[6];
      for (int i = 0; i < nl; ++i) g[i] = geom.grad(ref[i]);
      const double w = rule.w[q] * geom.detj * weight;
      for (int i = 0; i < nl; ++i) {
        const double kg0 = k[0][0] * g[i][0] + k[0][1] * g[i][1];
        const double kg1 = k[1][0] * g[i][0] + k[1][1] * g[i][1];
        for (int j = 0; j < nl; ++j)
          local[i][j] += w * (kg0 * g[j][0] + kg1 * g[j][1]);
      }
    }
    const auto& ed = space.element_dofs[t];
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        for (int c = 0; c < space.components; ++c)
          trips.push_back({double(space.global_of(ed[i], c)),
                           double(space.global_of(ed[j], c)), local[i][j]});
  }
}

}  // namespace

SparseMatrix assemble_stokes_stiffness(const FeSpace& velocity,
                                       const PhysicalCoefficients& coeffs,
                                       const TraceMap& trace) {
  coeffs.validate();
  std::vector<std::array<double, 3>> trips;
  add_stiffness_triplets(velocity,
                         {{{coeffs.nu, 0.0}, {0.0, coeffs.nu}}}, 1.0, trips);

  // Interface slip term: bjs * (u.tau)(v.tau) along the interface.
  const double bjs = coeffs.bjs_coefficient();
  const auto& rule = segment_rule();
  for (const TraceEdge& te : trace.edges) {
    double local[3][3] = {};
    for (int q = 0; q < SegmentRule::size; ++q) {
      const auto b = edge_basis(rule.s[q]);
      const double w = rule.w[q] * te.length * bjs;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) local[i][j] += w * b[i] * b[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int ci = 0; ci < 2; ++ci)
          for (int cj = 0; cj < 2; ++cj) {
            const double v = local[i][j] * te.tangent[ci] * te.tangent[cj];
            if (v != 0.0)
              trips.push_back(
                  {double(velocity.global_of(te.fluid_scalar[i], ci)),
                   double(velocity.global_of(te.fluid_scalar[j], cj)), v});
          }
  }
  return SparseMatrix::from_triplets(velocity.dof_count, velocity.dof_count,
                                     std::move(trips));
}

SparseMatrix assemble_darcy_stiffness(const FeSpace& head,
                                      const PhysicalCoefficients& coeffs) {
  coeffs.validate();
  std::vector<std::array<double, 3>> trips;
  add_stiffness_triplets(head, coeffs.k, coeffs.g, trips);
  return SparseMatrix::from_triplets(head.dof_count, head.dof_count,
                                     std::move(trips));
}

SparseMatrix assemble_divergence(const FeSpace& velocity,
                                 const FeSpace& pressure) {
  if (velocity.mesh != pressure.mesh)
    throw std::invalid_argument("assemble_divergence: spaces on different meshes");
  const auto& rule = triangle_rule_deg4();
  std::vector<std::array<double, 3>> trips;
  double pv[3];
  std::array<double, 2> ref[6];
  for (size_t t = 0; t < velocity.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*velocity.mesh, velocity.mesh->triangles[t]);
    double local[3][6][2] = {};  // pressure i, velocity j, component c
    for (int q = 0; q < TriangleRule::size; ++q) {
      eval_basis(pressure.kind, rule.l1[q], rule.l2[q], pv);
      eval_basis_grad(velocity.kind, rule.l1[q], rule.l2[q], ref);
      const double w = rule.w[q] * geom.detj;
      for (int j = 0; j < velocity.local_size; ++j) {
        const auto g = geom.grad(ref[j]);
        for (int i = 0; i < pressure.local_size; ++i) {
          local[i][j][0] -= w * pv[i] * g[0];
          local[i][j][1] -= w * pv[i] * g[1];
        }
      }
    }
    const auto& pd = pressure.element_dofs[t];
    const auto& vd = velocity.element_dofs[t];
    for (int i = 0; i < pressure.local_size; ++i)
      for (int j = 0; j < velocity.local_size; ++j)
        for (int c = 0; c < 2; ++c)
          trips.push_back({double(pd[i]), double(velocity.global_of(vd[j], c)),
                           local[i][j][c]});
  }
  return SparseMatrix::from_triplets(pressure.dof_count, velocity.dof_count,
                                     std::move(trips));
}

SparseMatrix assemble_interface_coupling(const FeSpace& velocity,
                                         const FeSpace& head,
                                         const TraceMap& trace, double g) {
  const auto& rule = segment_rule();
  std::vector<std::array<double, 3>> trips;
  for (const TraceEdge& te : trace.edges) {
    double local[3][3] = {};
    for (int q = 0; q < SegmentRule::size; ++q) {
      const auto b = edge_basis(rule.s[q]);  // same trace basis on both sides
      const double w = rule.w[q] * te.length * g;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) local[i][j] += w * b[i] * b[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 2; ++c) {
          const double v = local[i][j] * te.normal_f[c];
          if (v != 0.0)
            trips.push_back({double(velocity.global_of(te.fluid_scalar[i], c)),
                             double(te.porous_scalar[j]), v});
        }
  }
  return SparseMatrix::from_triplets(velocity.dof_count, head.dof_count,
                                     std::move(trips));
}

Vector assemble_load(const FeSpace& space, const ScalarField& forcing,
                     double weight) {
  if (space.components != 1)
    throw std::invalid_argument("assemble_load: scalar forcing on vector space");
  const auto& rule = triangle_rule_deg4();
  Vector out(space.dof_count, 0.0);
  double values[6];
  for (size_t t = 0; t < space.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*space.mesh, space.mesh->triangles[t]);
    const auto& ed = space.element_dofs[t];
    for (int q = 0; q < TriangleRule::size; ++q) {
      eval_basis(space.kind, rule.l1[q], rule.l2[q], values);
      const auto xy = geom.map(rule.l1[q], rule.l2[q]);
      const double w = rule.w[q] * geom.detj * weight * forcing(xy[0], xy[1]);
      for (int i = 0; i < space.local_size; ++i) out[ed[i]] += w * values[i];
    }
  }
  return out;
}

Vector assemble_load(const FeSpace& space, const VectorField& forcing,
                     double weight) {
  if (space.components != 2)
    throw std::invalid_argument("assemble_load: vector forcing on scalar space");
  const auto& rule = triangle_rule_deg4();
  Vector out(space.dof_count, 0.0);
  double values[6];
  for (size_t t = 0; t < space.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*space.mesh, space.mesh->triangles[t]);
    const auto& ed = space.element_dofs[t];
    for (int q = 0; q < TriangleRule::size; ++q) {
      eval_basis(space.kind, rule.l1[q], rule.l2[q], values);
      const auto xy = geom.map(rule.l1[q], rule.l2[q]);
      const auto f = forcing(xy[0], xy[1]);
      const double w = rule.w[q] * geom.detj * weight;
      for (int i = 0; i < space.local_size; ++i)
        for (int c = 0; c < 2; ++c)
          out[space.global_of(ed[i], c)] += w * values[i] * f[c];
    }
  }
  return out;
}

namespace {

template <typename EvalDiff>
double quadrature_l2(const FeSpace& space, EvalDiff&& diff_sq) {
  const auto& rule = triangle_rule_deg4();
  double total = 0.0;
  for (size_t t = 0; t < space.mesh->triangles.size(); ++t) {
    const ElementGeometry geom(*space.mesh, space.mesh->triangles[t]);
    for (int q = 0; q < TriangleRule::size; ++q) {
      const auto xy = geom.map(rule.l1[q], rule.l2[q]);
      total += rule.w[q] * geom.detj *
               diff_sq(t, rule.l1[q], rule.l2[q], xy[0], xy[1]);
    }
  }
  return std::sqrt(total);
}

}  // namespace

double l2_error(const FeSpace& space, std::span<const double> dofs,
                const ScalarField& exact) {
  double values[6];
  return quadrature_l2(space, [&](size_t t, double l1, double l2, double x,
                                  double y) {
    eval_basis(space.kind, l1, l2, values);
    double uh = 0.0;
    for (int i = 0; i < space.local_size; ++i)
      uh += values[i] * dofs[space.element_dofs[t][i]];
    const double d = uh - exact(x, y);
    return d * d;
  });
}

double l2_error(const FeSpace& space, std::span<const double> dofs,
                const VectorField& exact) {
  double values[6];
  return quadrature_l2(space, [&](size_t t, double l1, double l2, double x,
                                  double y) {
    eval_basis(space.kind, l1, l2, values);
    double uh0 = 0.0, uh1 = 0.0;
    for (int i = 0; i < space.local_size; ++i) {
      const int s = space.element_dofs[t][i];
      uh0 += values[i] * dofs[space.global_of(s, 0)];
      uh1 += values[i] * dofs[space.global_of(s, 1)];
    }
    const auto e = exact(x, y);
    const double d0 = uh0 - e[0], d1 = uh1 - e[1];
    return d0 * d0 + d1 * d1;
  });
}

double l2_norm(const FeSpace& space, const ScalarField& f) {
  return quadrature_l2(space, [&](size_t, double, double, double x, double y) {
    const double v = f(x, y);
    return v * v;
  });
}

double l2_norm(const FeSpace& space, const VectorField& f) {
  return quadrature_l2(space, [&](size_t, double, double, double x, double y) {
    const auto v = f(x, y);
    return v[0] * v[0] + v[1] * v[1];
  });
}

Vector interpolate(const FeSpace& space, const ScalarField& f) {
  Vector out(space.dof_count);
  for (int s = 0; s < space.scalar_count; ++s)
    out[s] = f(space.dof_coords[s][0], space.dof_coords[s][1]);
  return out;
}

Vector interpolate(const FeSpace& space, const VectorField& f) {
  Vector out(space.dof_count);
  for (int s = 0; s < space.scalar_count; ++s) {
    const auto v = f(space.dof_coords[s][0], space.dof_coords[s][1]);
    out[space.global_of(s, 0)] = v[0];
    out[space.global_of(s, 1)] = v[1];
  }
  return out;
}

double mass_norm(const SparseMatrix& mass, std::span<const double> x) {
  const Vector mx = mass.multiply(x);
  double s = 0.0;
  for (size_t i = 0; i < mx.size(); ++i) s += x[i] * mx[i];
  return std::sqrt(std::max(0.0, s));
}

}  // namespace sd
