#include "sd/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace sd {

namespace {

void check_range(double theta, double tau) {
  if (!(theta > 0.0) || !(theta < 0.5))
    throw std::invalid_argument("theta must lie strictly inside (0, 1/2)");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

}  // namespace

AbTriples ab_triples(double theta, double tau) {
  check_range(theta, tau);
  const double w = 1.0 - theta;
  const double v = 1.0 - 2.0 * theta;
  AbTriples t;
  t.a.c2 = (2.0 * w * tau + 1.0) / (tau + 1.0);
  t.a.c1 = -(v * tau + 1.0);
  t.a.c0 = v * tau * tau / (tau + 1.0);
  t.b.c2 = (2.0 * w * w * tau + w) / (tau + 1.0);
  t.b.c1 = -(w * v * tau - theta);
  t.b.c0 = w * v * tau * tau / (tau + 1.0);
  t.delta = t.b.c2 - 0.5 * t.a.c2;
  return t;
}

AnalysisCoefficients analysis_coeffs(double theta, double tau) {
  check_range(theta, tau);
  const double den = 2.0 * (tau + 1.0) * (tau + 1.0);
  AnalysisCoefficients c{};
  c.d = (2.0 * (1.0 - theta) * (5.0 - 6.0 * theta) * tau * tau +
         (4.0 * theta * theta - 16.0 * theta + 11.0) * tau + 3.0 - 2.0 * theta) /
        den;
  c.h = (2.0 * (3.0 - 4.0 * theta) * tau * tau + 8.0 * (1.0 - theta) * tau + 2.0) /
        den;
  c.e = (2.0 * (1.0 - 2.0 * theta) * (2.0 - 3.0 * theta) * tau * tau +
         (1.0 - 2.0 * theta) * (3.0 - 2.0 * theta) * tau + 1.0 - 2.0 * theta) /
        den;
  c.f = (12.0 * (1.0 - theta) * (1.0 - 2.0 * theta) * tau * tau +
         2.0 * (1.0 - 2.0 * theta) * (5.0 - 2.0 * theta) * tau +
         2.0 * (1.0 - 2.0 * theta)) /
        den;
  const double gd =
      6.0 * tau * tau * theta - 4.0 * tau * tau + 2.0 * tau * theta - 3.0 * tau - 1.0;
  const double gq = 2.0 * tau * theta - 2.0 * tau - 1.0;
  c.g = (3.0 * tau + 1.0) * (3.0 * tau + 1.0) * gq * gq *
        (-1.0 + 2.0 * theta) / (den * gd);
  c.i = (tau + 1.0) * gq / gd;
  return c;
}

QuadraticBoundResult lemma_bound_check(double theta, double tau, double v0,
                                       double v1, double v2) {
  const AbTriples t = ab_triples(theta, tau);
  const AnalysisCoefficients c = analysis_coeffs(theta, tau);
  QuadraticBoundResult r;
  r.lhs = 2.0 * t.a.apply(v0, v1, v2) * t.b.apply(v0, v1, v2);
  r.rhs = c.d * v2 * v2 - c.h * v1 * v1 - c.e * v0 * v0 -
          c.f * (v2 * v1 - v1 * v0);
  r.holds = r.lhs >= r.rhs - 1e-12;
  return r;
}

CoeffTriple s_combination(double theta, double tau) {
  check_range(theta, tau);
  const double wv = (1.0 - theta) * (1.0 - 2.0 * theta);
  CoeffTriple s;
  s.c2 = -wv * tau / (tau + 1.0);
  s.c1 = wv * tau - theta;
  s.c0 = -wv * tau * tau / (tau + 1.0);
  return s;
}

CoeffTriple w_combination(double theta, double tau) {
  check_range(theta, tau);
  const double w = 1.0 - theta;
  const double top = 2.0 * w * w * tau + w;  // 2(1-theta)^2 tau + 1 - theta
  CoeffTriple c;
  c.c1 = top;
  c.c0 = -(2.0 * w * w * tau * tau + w * tau) / (tau + 1.0);
  c.c2 = -top / (tau + 1.0);
  return c;
}

bool TheoryReport::all_pass() const {
  if (!positivity_pass || bound_violations != 0) return false;
  return std::all_of(identities.begin(), identities.end(),
                     [](const Identity& i) { return i.pass; });
}

TheoryReport run_theory_checks(int grid_n, std::int64_t samples,
                               std::uint64_t seed) {
  if (grid_n < 2) throw std::invalid_argument("run_theory_checks: grid too small");
  TheoryReport report;
  report.identities = {
      {"D = A2^2 + delta", 0.0, false},  {"H = 2 A2 - 1", 0.0, false},
      {"E = (A2-1)^2 + delta", 0.0, false},
      {"F = 2 (A2 (A2-1) + delta)", 0.0, false},
      {"I = D - G", 0.0, false},         {"A weights sum to 0", 0.0, false},
      {"reconstruction weights sum to 1", 0.0, false},
  };

  double min_coeff = std::numeric_limits<double>::infinity();
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
  };

  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double theta = 0.01 + (0.49 - 0.01) * i / (grid_n - 1.0);
      const double tau = 0.05 + (3.0 - 0.05) * j / (grid_n - 1.0);
      const AbTriples t = ab_triples(theta, tau);
      const AnalysisCoefficients c = analysis_coeffs(theta, tau);
      const double a2 = t.a.c2;

      double errs[7];
      errs[0] = rel(c.d, a2 * a2 + t.delta);
      errs[1] = rel(c.h, 2.0 * a2 - 1.0);
      errs[2] = rel(c.e, (a2 - 1.0) * (a2 - 1.0) + t.delta);
      errs[3] = rel(c.f, 2.0 * (a2 * (a2 - 1.0) + t.delta));
      errs[4] = rel(c.i, c.d - c.g);
      errs[5] = std::abs(t.a.sum());
      // Reconstruction weights are (A2, c1+1, A0) of the A triple.
      errs[6] = std::abs(t.a.c2 + (t.a.c1 + 1.0) + t.a.c0 - 1.0);
      for (int k = 0; k < 7; ++k)
        report.identities[k].max_rel_error =
            std::max(report.identities[k].max_rel_error, errs[k]);

      min_coeff = std::min({min_coeff, c.d, c.h, c.e, c.f, c.g, c.i});
    }
  }
  for (auto& id : report.identities) id.pass = id.max_rel_error <= 1e-12;
  report.min_coefficient_value = min_coeff;
  report.positivity_pass = min_coeff > 0.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> theta_dist(0.05, 0.45);
  std::uniform_real_distribution<double> tau_dist(0.1, 2.0);
  std::uniform_real_distribution<double> v_dist(-10.0, 10.0);
  report.bound_samples = samples;
  for (std::int64_t s = 0; s < samples; ++s) {
    const auto r = lemma_bound_check(theta_dist(rng), tau_dist(rng), v_dist(rng),
                                     v_dist(rng), v_dist(rng));
    if (!r.holds) ++report.bound_violations;
  }
  return report;
}

std::string theory_report_table(const TheoryReport& report) {
  std::string out;
  char buf[160];
  for (const auto& id : report.identities) {
    std::snprintf(buf, sizeof(buf), "%-36s max_rel_err=%.3e  %s\n",
                  id.name.c_str(), id.max_rel_error, id.pass ? "PASS" : "FAIL");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-36s min_value=%.6e  %s\n",
                "positivity of D,H,E,F,G,I", report.min_coefficient_value,
                report.positivity_pass ? "PASS" : "FAIL");
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "%-36s violations=%lld/%lld  %s\n", "quadratic lower bound",
                static_cast<long long>(report.bound_violations),
                static_cast<long long>(report.bound_samples),
                report.bound_violations == 0 ? "PASS" : "FAIL");
  out += buf;
  return out;
}

}  // namespace sd
