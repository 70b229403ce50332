#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace sd {

using Point = std::array<double, 2>;

enum class BoundaryTag : std::uint8_t { FluidOuter, PorousOuter, Interface };

struct Rect {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Which tag each side of a rectangle receives when meshing it.
struct SideTags {
  BoundaryTag left, right, bottom, top;
};

struct MeshEdge {
  int a, b;  // node ids, a < b
  std::optional<BoundaryTag> tag;  // boundary edges only
};

/// Conforming triangulation of a rectangle. Triangles are counterclockwise;
/// the edge list covers every element edge exactly once.
struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<MeshEdge> edges;

  int edge_id(int a, int b) const;  // -1 if absent
  double triangle_area(int t) const;
  double max_edge_length() const;

 private:
  friend Mesh build_rect_mesh(const Rect&, int, int, const SideTags&);
  std::vector<std::pair<std::int64_t, int>> edge_index_;  // sorted (key, id)
};

struct CoupledMesh {
  Mesh fluid;
  Mesh porous;
  // (fluid edge id, porous edge id); paired edges span identical coordinates.
  std::vector<std::pair<int, int>> interface_pairs;
};

/// Structured grid of (nx+1)*(ny+1) nodes and 2*nx*ny triangles, each cell
/// split along the lower-left to upper-right diagonal.
Mesh build_rect_mesh(const Rect& rect, int nx, int ny, const SideTags& tags);

/// Both subdomains are meshed with n subdivisions along the shared horizontal
/// interface (fluid above, porous below), so interface nodes coincide bitwise.
CoupledMesh build_coupled_mesh(const Rect& fluid, const Rect& porous, int n);

}  // namespace sd
