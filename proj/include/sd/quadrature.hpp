#pragma once

#include <array>

namespace sd {

/// 6-point triangle rule on the reference simplex, exact for degree 4.
/// Weights sum to 1/2 (reference area).
struct TriangleRule {
  static constexpr int size = 6;
  std::array<double, size> l1, l2, w;
};

inline const TriangleRule& triangle_rule_deg4() {
  // Two orbits of three symmetric points each.
  constexpr double a1 = 0.445948490915965;
  constexpr double b1 = 0.108103018168070;
  constexpr double w1 = 0.223381589678011 * 0.5;
  constexpr double a2 = 0.091576213509771;
  constexpr double b2 = 0.816847572980459;
  constexpr double w2 = 0.109951743655322 * 0.5;
  static const TriangleRule rule{
      {a1, a1, b1, a2, a2, b2},
      {a1, b1, a1, a2, b2, a2},
      {w1, w1, w1, w2, w2, w2}};
  return rule;
}

/// 3-point Gauss rule on [0,1], exact for degree 5.
struct SegmentRule {
  static constexpr int size = 3;
  std::array<double, size> s, w;
};

inline const SegmentRule& segment_rule() {
  constexpr double r = 0.7745966692414834;  // sqrt(3/5)
  static const SegmentRule rule{
      {0.5 * (1.0 - r), 0.5, 0.5 * (1.0 + r)},
      {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  return rule;
}

}  // namespace sd
