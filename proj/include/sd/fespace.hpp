#pragma once

#include <array>
#include <vector>

#include "sd/geometry.hpp"

namespace sd {

enum class ElementKind { P1, P2 };

/// Lagrange space on a triangulation. Scalar DOFs are numbered nodes first,
/// then (for P2) one DOF per mesh edge, giving a deterministic layout.
/// Vector spaces interleave components: global = components*scalar + c.
struct FeSpace {
  const Mesh* mesh = nullptr;
  ElementKind kind = ElementKind::P1;
  int components = 1;

  int scalar_count = 0;            // DOFs per component
  int dof_count = 0;               // scalar_count * components
  int local_size = 0;              // scalar basis functions per triangle
  std::vector<std::array<int, 6>> element_dofs;  // scalar ids, first local_size used
  std::vector<Point> dof_coords;   // per scalar DOF

  int global_of(int scalar_dof, int component) const {
    return scalar_dof * components + component;
  }
};

FeSpace build_space(const Mesh& mesh, ElementKind kind, int components);

/// Scalar basis values / reference gradients at barycentric point (l0,l1,l2).
/// P2 local order: 3 vertices, then midpoints of edges (0,1), (1,2), (0,2).
void eval_basis(ElementKind kind, double l1, double l2, double* values);
void eval_basis_grad(ElementKind kind, double l1, double l2,
                     std::array<double, 2>* grads);  // d/dl1, d/dl2 pulled to (xi,eta)

/// All DOFs (every component) supported on an edge carrying `tag`.
/// Returned sorted and unique; corner DOFs shared with another tag are included.
std::vector<int> dirichlet_dofs(const FeSpace& space, BoundaryTag tag);

/// One entry per interface edge: trace DOFs on both sides ordered left to
/// right as (endpoint, midpoint, endpoint), plus edge geometry. n_f points
/// out of the fluid domain; with fluid above a horizontal interface this is
/// (0,-1) and the tangent is (1,0).
struct TraceEdge {
  std::array<int, 3> fluid_scalar;   // scalar velocity-space DOF ids
  std::array<int, 3> porous_scalar;  // head-space DOF ids
  double length = 0.0;
  std::array<double, 2> normal_f{0.0, -1.0};
  std::array<double, 2> tangent{1.0, 0.0};
};

struct TraceMap {
  std::vector<TraceEdge> edges;
};

TraceMap build_trace_map(const FeSpace& fluid_velocity, const FeSpace& porous_head,
                         const CoupledMesh& coupled);

}  // namespace sd
