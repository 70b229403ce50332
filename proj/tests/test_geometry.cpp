#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sd/geometry.hpp"

using namespace sd;

namespace {
constexpr double pi = std::numbers::pi;

const SideTags all_fluid{BoundaryTag::FluidOuter, BoundaryTag::FluidOuter,
                         BoundaryTag::FluidOuter, BoundaryTag::FluidOuter};

double area_sum(const Mesh& m) {
  double a = 0.0;
  for (size_t t = 0; t < m.triangles.size(); ++t) a += m.triangle_area(t);
  return a;
}
}  // namespace

TEST_CASE("unit square with one cell") {
  const Mesh m = build_rect_mesh({0, 1, 0, 1}, 1, 1, all_fluid);
  CHECK(m.nodes.size() == 4);
  CHECK(m.triangles.size() == 2);
  CHECK(m.edges.size() == 5);

  for (size_t t = 0; t < m.triangles.size(); ++t)
    CHECK(m.triangle_area(t) > 0.0);

  int tagged = 0, untagged = 0;
  for (const auto& e : m.edges) (e.tag ? tagged : untagged)++;
  CHECK(tagged == 4);
  CHECK(untagged == 1);  // the diagonal
}

TEST_CASE("strip domain counts") {
  const Mesh m = build_rect_mesh({0, pi, 0, 1}, 2, 1, all_fluid);
  CHECK(m.nodes.size() == 6);
  CHECK(m.triangles.size() == 4);
}

TEST_CASE("zero subdivisions are rejected") {
  CHECK_THROWS_AS(build_rect_mesh({0, 1, 0, 1}, 0, 1, all_fluid),
                  std::invalid_argument);
}

TEST_CASE("interior edges are shared by exactly two triangles") {
  const Mesh m = build_rect_mesh({0, 1, 0, 1}, 3, 2, all_fluid);
  for (size_t e = 0; e < m.edges.size(); ++e) {
    int adjacent = 0;
    for (const auto& tri : m.triangles)
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k], b = tri[(k + 1) % 3];
        if (std::minmax(a, b) == std::minmax(m.edges[e].a, m.edges[e].b))
          ++adjacent;
      }
    CHECK(adjacent == (m.edges[e].tag ? 1 : 2));
  }
}

TEST_CASE("coupled mesh pairs the interface") {
  const CoupledMesh cm = build_coupled_mesh({0, 1, 1, 2}, {0, 1, 0, 1}, 4);
  CHECK(cm.interface_pairs.size() == 4);
  for (const auto& [fe, pe] : cm.interface_pairs) {
    const auto& f = cm.fluid.edges[fe];
    const auto& p = cm.porous.edges[pe];
    CHECK(cm.fluid.nodes[f.a] == cm.porous.nodes[p.a]);
    CHECK(cm.fluid.nodes[f.b] == cm.porous.nodes[p.b]);
  }
}

TEST_CASE("interface pairing on the strip pair") {
  const CoupledMesh cm =
      build_coupled_mesh({0, pi, 0, 1}, {0, pi, -1, 0}, 8);
  CHECK(cm.interface_pairs.size() == 8);
  for (const auto& [fe, pe] : cm.interface_pairs) {
    const auto& f = cm.fluid.edges[fe];
    const auto& p = cm.porous.edges[pe];
    CHECK(cm.fluid.nodes[f.a] == cm.porous.nodes[p.a]);
    CHECK(cm.fluid.nodes[f.b] == cm.porous.nodes[p.b]);
  }
}

TEST_CASE("mismatched extents are rejected") {
  CHECK_THROWS_AS(build_coupled_mesh({0, 1, 1, 2}, {0, 2, 0, 1}, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_coupled_mesh({0, 1, 1.5, 2}, {0, 1, 0, 1}, 4),
                  std::invalid_argument);
}

TEST_CASE("triangle areas fill the rectangle") {
  for (int n : {1, 3, 7}) {
    const Mesh m = build_rect_mesh({0, pi, -1, 1}, n, 2 * n, all_fluid);
    CHECK(area_sum(m) == doctest::Approx(2.0 * pi).epsilon(1e-12));
  }
}

TEST_CASE("mesh diameter halves under refinement") {
  for (int n : {2, 5}) {
    const Mesh coarse = build_rect_mesh({0, pi, 0, 1}, n, n, all_fluid);
    const Mesh fine = build_rect_mesh({0, pi, 0, 1}, 2 * n, 2 * n, all_fluid);
    CHECK(fine.max_edge_length() ==
          doctest::Approx(0.5 * coarse.max_edge_length()).epsilon(1e-12));
  }
}
