#include "sd/fespace.hpp"

#include <algorithm>
#include <stdexcept>

namespace sd {

FeSpace build_space(const Mesh& mesh, ElementKind kind, int components) {
  if (components < 1 || components > 2)
    throw std::invalid_argument("build_space: components must be 1 or 2");
  FeSpace s;
  s.mesh = &mesh;
  s.kind = kind;
  s.components = components;
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  const int n_edges = static_cast<int>(mesh.edges.size());
  s.scalar_count = kind == ElementKind::P1 ? n_nodes : n_nodes + n_edges;
  s.dof_count = s.scalar_count * components;
  s.local_size = kind == ElementKind::P1 ? 3 : 6;

  s.dof_coords.resize(s.scalar_count);
  for (int i = 0; i < n_nodes; ++i) s.dof_coords[i] = mesh.nodes[i];
  if (kind == ElementKind::P2) {
    for (int e = 0; e < n_edges; ++e) {
      const Point& a = mesh.nodes[mesh.edges[e].a];
      const Point& b = mesh.nodes[mesh.edges[e].b];
      s.dof_coords[n_nodes + e] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    }
  }

  s.element_dofs.resize(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    auto& ed = s.element_dofs[t];
    ed = {tri[0], tri[1], tri[2], -1, -1, -1};
    if (kind == ElementKind::P2) {
      ed[3] = n_nodes + mesh.edge_id(tri[0], tri[1]);
      ed[4] = n_nodes + mesh.edge_id(tri[1], tri[2]);
      ed[5] = n_nodes + mesh.edge_id(tri[0], tri[2]);
    }
  }
  return s;
}

void eval_basis(ElementKind kind, double l1, double l2, double* v) {
  const double l0 = 1.0 - l1 - l2;
  if (kind == ElementKind::P1) {
    v[0] = l0;
    v[1] = l1;
    v[2] = l2;
    return;
  }
  v[0] = l0 * (2.0 * l0 - 1.0);
  v[1] = l1 * (2.0 * l1 - 1.0);
  v[2] = l2 * (2.0 * l2 - 1.0);
  v[3] = 4.0 * l0 * l1;
  v[4] = 4.0 * l1 * l2;
  v[5] = 4.0 * l0 * l2;
}

void eval_basis_grad(ElementKind kind, double l1, double l2,
                     std::array<double, 2>* g) {
  const double l0 = 1.0 - l1 - l2;
  if (kind == ElementKind::P1) {
    g[0] = {-1.0, -1.0};
    g[1] = {1.0, 0.0};
    g[2] = {0.0, 1.0};
    return;
  }
  g[0] = {1.0 - 4.0 * l0, 1.0 - 4.0 * l0};
  g[1] = {4.0 * l1 - 1.0, 0.0};
  g[2] = {0.0, 4.0 * l2 - 1.0};
  g[3] = {4.0 * (l0 - l1), -4.0 * l1};
  g[4] = {4.0 * l2, 4.0 * l1};
  g[5] = {-4.0 * l2, 4.0 * (l0 - l2)};
}

std::vector<int> dirichlet_dofs(const FeSpace& space, BoundaryTag tag) {
  const Mesh& mesh = *space.mesh;
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  std::vector<int> scalar;
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    if (mesh.edges[e].tag != tag) continue;
    scalar.push_back(mesh.edges[e].a);
    scalar.push_back(mesh.edges[e].b);
    if (space.kind == ElementKind::P2) scalar.push_back(n_nodes + static_cast<int>(e));
  }
  std::sort(scalar.begin(), scalar.end());
  scalar.erase(std::unique(scalar.begin(), scalar.end()), scalar.end());

  std::vector<int> out;
  out.reserve(scalar.size() * space.components);
  for (int s : scalar)
    for (int c = 0; c < space.components; ++c) out.push_back(space.global_of(s, c));
  std::sort(out.begin(), out.end());
  return out;
}

TraceMap build_trace_map(const FeSpace& fluid_velocity, const FeSpace& porous_head,
                         const CoupledMesh& coupled) {
  if (fluid_velocity.mesh != &coupled.fluid || porous_head.mesh != &coupled.porous)
    throw std::invalid_argument("build_trace_map: spaces not on the coupled mesh");
  if (fluid_velocity.kind != ElementKind::P2 || porous_head.kind != ElementKind::P2)
    throw std::invalid_argument("build_trace_map: P2 trace spaces required");

  TraceMap tm;
  tm.edges.reserve(coupled.interface_pairs.size());
  const int nf = static_cast<int>(coupled.fluid.nodes.size());
  const int np = static_cast<int>(coupled.porous.nodes.size());
  for (const auto& [fe_id, pe_id] : coupled.interface_pairs) {
    const MeshEdge& fe = coupled.fluid.edges[fe_id];
    const MeshEdge& pe = coupled.porous.edges[pe_id];
    TraceEdge te;
    te.fluid_scalar = {fe.a, nf + fe_id, fe.b};
    te.porous_scalar = {pe.a, np + pe_id, pe.b};
    const Point& a = coupled.fluid.nodes[fe.a];
    const Point& b = coupled.fluid.nodes[fe.b];
    te.length = std::abs(b[0] - a[0]);
    for (int k = 0; k < 3; ++k) {
      const Point& cf = fluid_velocity.dof_coords[te.fluid_scalar[k]];
      const Point& cp = porous_head.dof_coords[te.porous_scalar[k]];
      if (cf != cp)
        throw std::logic_error("build_trace_map: trace DOF coordinates disagree");
    }
    tm.edges.push_back(te);
  }
  return tm;
}

}  // namespace sd
