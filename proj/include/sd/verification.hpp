#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sd {

/// Weights (c0, c1, c2) on (y^{m-1}, y^m, y^{m+1}).
struct CoeffTriple {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double apply(double y0, double y1, double y2) const {
    return c0 * y0 + c1 * y1 + c2 * y2;
  }
  double sum() const { return c0 + c1 + c2; }
};

struct AbTriples {
  CoeffTriple a, b;
  double delta = 0.0;  // b.c2 - a.c2 / 2, positive on the scheme's range
};

/// Multistep weights of the filtered update and their companions, as
/// functions of theta and the step ratio tau.
AbTriples ab_triples(double theta, double tau);

struct AnalysisCoefficients {
  double d, h, e, f, g, i;  // all positive for theta in (0,1/2), tau > 0
};
AnalysisCoefficients analysis_coeffs(double theta, double tau);

struct QuadraticBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;  // lhs >= rhs - 1e-12
};

/// Scalar quadratic-form lower bound tying the A/B triples to the D/H/E/F
/// coefficients: 2(sum A_i v_i)(sum B_i v_i) >= D v2^2 - H v1^2 - E v0^2
/// - F (v2 v1 - v1 v0).
QuadraticBoundResult lemma_bound_check(double theta, double tau, double v0,
                                       double v1, double v2);

/// Weights on (F^{m-1}, F^m, F^{m+1}) and (eta^{m-1}, eta^m, eta^{m+1}).
CoeffTriple s_combination(double theta, double tau);
CoeffTriple w_combination(double theta, double tau);

struct TheoryReport {
  struct Identity {
    std::string name;
    double max_rel_error = 0.0;
    bool pass = false;
  };
  std::vector<Identity> identities;
  double min_coefficient_value = 0.0;  // over D,H,E,F,G,I on the grid
  bool positivity_pass = false;
  std::int64_t bound_samples = 0;
  std::int64_t bound_violations = 0;
  bool all_pass() const;
};

/// Identity sweep on a grid_n x grid_n (theta, tau) grid at 1e-12 relative
/// tolerance plus randomized checks of the quadratic bound.
TheoryReport run_theory_checks(int grid_n, std::int64_t samples,
                               std::uint64_t seed);

std::string theory_report_table(const TheoryReport& report);

}  // namespace sd
