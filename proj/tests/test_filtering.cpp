#include <doctest.h>

#include <cmath>

#include "sd/filtering.hpp"
#include "test_support.hpp"

using namespace sd;

TEST_CASE("linear extrapolations pass through unchanged") {
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = sdtest::uniform(0.05, 0.45);
    const double tau = sdtest::uniform(0.2, 2.0);
    const Vector ym = sdtest::random_vector(5);
    const Vector ym1 = sdtest::random_vector(5);
    Vector yhat(5);
    for (int i = 0; i < 5; ++i) yhat[i] = (1.0 + tau) * ym[i] - tau * ym1[i];
    const Vector out = apply_filter(yhat, ym, ym1, theta, tau);
    for (int i = 0; i < 5; ++i)
      CHECK(out[i] == doctest::Approx(yhat[i]).epsilon(1e-13));
  }
}

TEST_CASE("worked filter value") {
  CHECK(apply_filter_scalar(3.0, 1.0, 0.0, 0.0, 1.0) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("vanishing filter weight gives the identity map") {
  // The leading coefficient carries (1 - 2*theta).
  const auto fc = FilterCoefficients::make(0.5, 1.3);
  CHECK(fc.kappa == 0.0);
  const Vector yhat = sdtest::random_vector(4);
  const Vector out = apply_filter(yhat, sdtest::random_vector(4),
                                  sdtest::random_vector(4), 0.5, 1.3);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == yhat[i]);
}

TEST_CASE("nonpositive step ratio is rejected") {
  const Vector v(3, 0.0);
  CHECK_THROWS_AS(apply_filter(v, v, v, 0.3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_filter(v, v, v, 0.3, -1.0), std::invalid_argument);
}

TEST_CASE("reconstruction inverts the filter") {
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = sdtest::uniform(0.05, 0.45);
    const double tau = sdtest::uniform(0.2, 2.0);
    const Vector yhat = sdtest::random_vector(8);
    const Vector ym = sdtest::random_vector(8);
    const Vector ym1 = sdtest::random_vector(8);
    const Vector filtered = apply_filter(yhat, ym, ym1, theta, tau);
    const Vector back = reconstruct_provisional(filtered, ym, ym1, theta, tau);
    for (int i = 0; i < 8; ++i)
      CHECK(back[i] == doctest::Approx(yhat[i]).epsilon(1e-13));
  }
}

TEST_CASE("reconstruction weights at a worked point") {
  const auto fc = FilterCoefficients::make(0.3, 1.0);
  CHECK(fc.reconstruction[0] == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(fc.reconstruction[1] == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(fc.reconstruction[2] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(fc.reconstruction[0] + fc.reconstruction[1] + fc.reconstruction[2] ==
        doctest::Approx(1.0).epsilon(1e-15));

  // Constant histories reconstruct to the same constant.
  const Vector c(3, 0.8);
  const Vector back = reconstruct_provisional(c, c, c, 0.3, 1.0);
  for (double v : back) CHECK(v == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("affine invariance and linearity") {
  const double theta = 0.27, tau = 1.4;
  const Vector yhat = sdtest::random_vector(6);
  const Vector ym = sdtest::random_vector(6);
  const Vector ym1 = sdtest::random_vector(6);
  const double c = 0.37;

  Vector yhat_c = yhat, ym_c = ym, ym1_c = ym1;
  for (int i = 0; i < 6; ++i) {
    yhat_c[i] += c;
    ym_c[i] += c;
    ym1_c[i] += c;
  }
  const Vector base = apply_filter(yhat, ym, ym1, theta, tau);
  const Vector shifted = apply_filter(yhat_c, ym_c, ym1_c, theta, tau);
  for (int i = 0; i < 6; ++i)
    CHECK(shifted[i] == doctest::Approx(base[i] + c).epsilon(1e-13));

  const Vector y2 = sdtest::random_vector(6);
  const Vector m2 = sdtest::random_vector(6);
  const Vector m12 = sdtest::random_vector(6);
  Vector ysum(6), msum(6), m1sum(6);
  for (int i = 0; i < 6; ++i) {
    ysum[i] = yhat[i] + y2[i];
    msum[i] = ym[i] + m2[i];
    m1sum[i] = ym1[i] + m12[i];
  }
  const Vector lhs = apply_filter(ysum, msum, m1sum, theta, tau);
  const Vector second = apply_filter(y2, m2, m12, theta, tau);
  for (int i = 0; i < 6; ++i)
    CHECK(lhs[i] == doctest::Approx(base[i] + second[i]).epsilon(1e-13));
}

// Local accuracy upgrade: one step from exact history has error O(k^2);
// the filtered value has error O(k^3). Measured on y' = -y + f with a known
// quadratic-plus-exponential solution.
TEST_CASE("filter lifts the local order beyond two point nine") {
  const double lambda = 1.0;
  auto exact = [](double t) { return 1.0 + t + 0.5 * t * t + std::exp(-2.0 * t); };
  auto dexact = [](double t) { return 1.0 + t - 2.0 * std::exp(-2.0 * t); };
  auto load = [&](double t) { return dexact(t) + lambda * exact(t); };
  const double theta = 0.3;
  const double t0 = 0.4;

  auto local_error = [&](double k, double tau_prev) {
    // Exact history at t0 - k/tau_prev and t0, one step of size k.
    const double km1 = k / tau_prev;
    const double ym1 = exact(t0 - km1);
    const double ym = exact(t0);
    const double fbar = (1.0 - theta) * load(t0 + k) + theta * load(t0);
    const double yhat = (ym - k * theta * lambda * ym + k * fbar) /
                        (1.0 + k * (1.0 - theta) * lambda);
    const double filtered =
        apply_filter_scalar(yhat, ym, ym1, theta, k / km1);
    return std::abs(filtered - exact(t0 + k));
  };

  for (double tau : {0.8, 1.0, 1.6}) {
    const double e1 = local_error(0.02, tau);
    const double e2 = local_error(0.01, tau);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 2.9);
  }
}
