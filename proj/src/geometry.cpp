#include "sd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sd {

namespace {

std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return static_cast<std::int64_t>(a) << 32 | static_cast<std::uint32_t>(b);
}

// Endpoint-clamped linspace so shared rectangle sides reproduce the same
// coordinates bitwise on both subdomain meshes.
double line_coord(double c0, double c1, int i, int n) {
  if (i == 0) return c0;
  if (i == n) return c1;
  return c0 + static_cast<double>(i) * ((c1 - c0) / static_cast<double>(n));
}

}  // namespace

int Mesh::edge_id(int a, int b) const {
  const auto key = edge_key(a, b);
  auto it = std::lower_bound(edge_index_.begin(), edge_index_.end(),
                             std::make_pair(key, -1));
  if (it == edge_index_.end() || it->first != key) return -1;
  return it->second;
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Point& p0 = nodes[tri[0]];
  const Point& p1 = nodes[tri[1]];
  const Point& p2 = nodes[tri[2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& e : edges) {
    const double dx = nodes[e.b][0] - nodes[e.a][0];
    const double dy = nodes[e.b][1] - nodes[e.a][1];
    m = std::max(m, std::hypot(dx, dy));
  }
  return m;
}

Mesh build_rect_mesh(const Rect& rect, int nx, int ny, const SideTags& tags) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rect_mesh: need nx >= 1 and ny >= 1");
  if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1))
    throw std::invalid_argument("build_rect_mesh: degenerate rectangle");

  Mesh mesh;
  mesh.nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.push_back(
          {line_coord(rect.x0, rect.x1, i, nx), line_coord(rect.y0, rect.y1, j, ny)});

  auto node = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.triangles.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = node(i, j), n10 = node(i + 1, j);
      const int n01 = node(i, j + 1), n11 = node(i + 1, j + 1);
      mesh.triangles.push_back({n00, n10, n11});
      mesh.triangles.push_back({n00, n11, n01});
    }
  }

  // Unique edge set with adjacency counts, then side tags for boundary edges.
  std::vector<std::pair<std::int64_t, int>> counted;
  counted.reserve(mesh.triangles.size() * 3);
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      counted.emplace_back(edge_key(tri[k], tri[(k + 1) % 3]), 1);
  std::sort(counted.begin(), counted.end());

  for (size_t i = 0; i < counted.size();) {
    size_t j = i;
    while (j < counted.size() && counted[j].first == counted[i].first) ++j;
    const int a = static_cast<int>(counted[i].first >> 32);
    const int b = static_cast<int>(counted[i].first & 0xffffffff);
    MeshEdge e{a, b, std::nullopt};
    if (j - i == 1) {
      const Point& pa = mesh.nodes[a];
      const Point& pb = mesh.nodes[b];
      if (pa[0] == rect.x0 && pb[0] == rect.x0) e.tag = tags.left;
      else if (pa[0] == rect.x1 && pb[0] == rect.x1) e.tag = tags.right;
      else if (pa[1] == rect.y0 && pb[1] == rect.y0) e.tag = tags.bottom;
      else if (pa[1] == rect.y1 && pb[1] == rect.y1) e.tag = tags.top;
      else throw std::logic_error("build_rect_mesh: untaggable boundary edge");
    }
    mesh.edge_index_.emplace_back(counted[i].first,
                                  static_cast<int>(mesh.edges.size()));
    mesh.edges.push_back(e);
    i = j;
  }
  return mesh;
}

CoupledMesh build_coupled_mesh(const Rect& fluid, const Rect& porous, int n) {
  if (fluid.y0 != porous.y1)
    throw std::invalid_argument(
        "build_coupled_mesh: fluid bottom must coincide with porous top");
  if (fluid.x0 != porous.x0 || fluid.x1 != porous.x1)
    throw std::invalid_argument("build_coupled_mesh: x-extents must coincide");
  if (n < 1) throw std::invalid_argument("build_coupled_mesh: n >= 1 required");

  const double width = fluid.width();
  auto rows = [&](double height) {
    return std::max(1, static_cast<int>(std::llround(n * height / width)));
  };

  CoupledMesh cm;
  cm.fluid = build_rect_mesh(
      fluid, n, rows(fluid.height()),
      {BoundaryTag::FluidOuter, BoundaryTag::FluidOuter, BoundaryTag::Interface,
       BoundaryTag::FluidOuter});
  cm.porous = build_rect_mesh(
      porous, n, rows(porous.height()),
      {BoundaryTag::PorousOuter, BoundaryTag::PorousOuter,
       BoundaryTag::PorousOuter, BoundaryTag::Interface});

  // Pair interface edges left to right; node generation guarantees the
  // endpoint coordinates agree bitwise.
  auto collect = [](const Mesh& mesh) {
    std::vector<std::pair<double, int>> found;
    for (size_t i = 0; i < mesh.edges.size(); ++i)
      if (mesh.edges[i].tag == BoundaryTag::Interface)
        found.emplace_back(std::min(mesh.nodes[mesh.edges[i].a][0],
                                    mesh.nodes[mesh.edges[i].b][0]),
                           static_cast<int>(i));
    std::sort(found.begin(), found.end());
    return found;
  };
  const auto ef = collect(cm.fluid);
  const auto ep = collect(cm.porous);
  if (ef.size() != ep.size())
    throw std::logic_error("build_coupled_mesh: interface edge count mismatch");
  for (size_t i = 0; i < ef.size(); ++i) {
    const auto& fe = cm.fluid.edges[ef[i].second];
    const auto& pe = cm.porous.edges[ep[i].second];
    if (cm.fluid.nodes[fe.a] != cm.porous.nodes[pe.a] ||
        cm.fluid.nodes[fe.b] != cm.porous.nodes[pe.b])
      throw std::logic_error("build_coupled_mesh: interface nodes do not match");
    cm.interface_pairs.emplace_back(ef[i].second, ep[i].second);
  }
  return cm;
}

}  // namespace sd
