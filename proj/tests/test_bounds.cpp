#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rwtree/bounds.hpp"
#include "rwtree/error.hpp"

using namespace rwtree;

namespace {

EnvSpec example_env(double kappa = 1.0 / 30) { return EnvSpec::rwre(2, {{0.3, kappa}, {3.5, 1.0 - kappa}}); }

// E[G^n] by direct summation of k^n q (1-q)^(k-1).
long double geometric_series(int n, long double q) {
  long double sum = 0.0L, w = q;
  for (long k = 1; k < 200000; ++k) {
    const long double term = std::pow(static_cast<long double>(k), n) * w;
    sum += term;
    if (term < 1e-30L * sum && k > 10) break;
    w *= 1.0L - q;
  }
  return sum;
}

// Rows of a_j^(n) = j (a_{j-1}^(n-1) - a_j^(n-1)).
std::vector<std::vector<long double>> coefficient_rows(int nmax) {
  std::vector<std::vector<long double>> rows = {{}, {1.0L}};
  for (int n = 2; n <= nmax; ++n) {
    const auto& prev = rows.back();
    std::vector<long double> row(n);
    for (int j = 1; j <= n; ++j) {
      const long double left = j >= 2 ? prev[j - 2] : 0.0L;
      const long double same = j <= n - 1 ? prev[j - 1] : 0.0L;
      row[j - 1] = j * (left - same);
    }
    rows.push_back(row);
  }
  return rows;
}

// The example speed bound from the closed forms, in long double.
long double example_speed_oracle(long double k) {
  const long double alpha = (117 + 468 * k) / (637 - 556 * k);
  const long double inv2 = 4.0L / 49 + 4864 * k / 441;
  const long double sum2 = 64.0L / 49 + 2560 * k / 441;
  const long double c2 = 2.0L;
  auto theta2 = [&](int n) {
    if (n == 1) return c2 * sum2;
    long double geo = 0.0L, pw = 1.0L;
    for (int i = 0; i < n; ++i) {
      geo += pw;
      pw *= inv2;
    }
    return c2 * 2 * sum2 * n * geo;
  };
  long double L = std::sqrt(theta2(1));
  for (int n = 2; n < 60; ++n) {
    const long double y = std::pow(alpha, std::pow(2.0L, n - 2));
    L += std::sqrt(theta2(n)) * std::sqrt(y * (2.0L - y));
  }
  return (1.0L - alpha) / L;
}

}  // namespace

TEST(GeometricMoment, ClosedFormsOfLowOrders) {
  for (double q : {0.1, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(geometric_moment(1, q), 1.0 / q, 1e-14 / q);
    EXPECT_NEAR(geometric_moment(2, q), (2.0 - q) / (q * q), 1e-13 / (q * q));
  }
  EXPECT_DOUBLE_EQ(geometric_moment(7, 1.0), 1.0);
}

TEST(GeometricMoment, MatchesTruncatedSeries) {
  for (int n = 1; n <= 6; ++n) {
    for (int i = 1; i <= 9; ++i) {
      const double q = i / 10.0;
      const long double oracle = geometric_series(n, q);
      EXPECT_LT(std::abs(geometric_moment(n, q) - oracle) / oracle, 1e-10) << "n " << n << " q " << q;
    }
  }
  EXPECT_LT(std::abs(geometric_moment(12, 0.3) - geometric_series(12, 0.3L)) / geometric_series(12, 0.3L), 1e-10);
}

TEST(GeometricMoment, CoefficientTableAndConstants) {
  const auto rows = coefficient_rows(10);
  const GeomMomentTable& t = default_geom_table();
  for (int n = 1; n <= 10; ++n) {
    ASSERT_EQ(t.row(n).size(), static_cast<std::size_t>(n));
    long double pos = 0.0L;
    for (int j = 0; j < n; ++j) {
      EXPECT_EQ(t.row(n)[j], rows[n][j]);
      if (rows[n][j] > 0) pos += rows[n][j];
    }
    EXPECT_EQ(t.c(n), pos);
    EXPECT_DOUBLE_EQ(c_constant(n), static_cast<double>(pos));
  }
  EXPECT_DOUBLE_EQ(c_constant(2), 2.0);
  EXPECT_DOUBLE_EQ(c_constant(3), 7.0);
  EXPECT_DOUBLE_EQ(c_constant(4), 38.0);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_NEAR(static_cast<double>(t.eval_row(n, 0.4L)), geometric_moment(n, 0.4), 1e-9 * geometric_moment(n, 0.4));
  }
}

TEST(GeometricMoment, ExcessAvoidsCancellation) {
  for (int n : {1, 2, 5, 10}) {
    for (double u : {1e-12, 1e-6, 1e-3, 0.2, 0.7}) {
      const long double oracle = geometric_series(n, 1.0L - u) - 1.0L;
      if (u >= 1e-3) {
        EXPECT_NEAR(geometric_moment_excess(n, u) / static_cast<double>(oracle), 1.0, 1e-9) << n << " " << u;
      } else {
        // First order: M(n, 1-u) - 1 ~ (2^n - 1) u.
        EXPECT_NEAR(geometric_moment_excess(n, u) / ((std::pow(2.0, n) - 1) * u), 1.0, 1e-2 + 1e3 * u);
      }
    }
  }
}

TEST(GeometricMoment, RejectsBadArguments) {
  EXPECT_THROW(geometric_moment(2, 0.0), DomainError);
  EXPECT_THROW(geometric_moment(2, 1.5), DomainError);
  EXPECT_THROW(geometric_moment(0, 0.5), DomainError);
  EXPECT_THROW(geometric_moment(25, 0.5), DomainError);
  EXPECT_NO_THROW(geometric_moment(25, 0.5, 40));
}

TEST(EnvMoments, ExampleClosedForms) {
  for (double k : {1.0 / 30, 0.1, 0.5}) {
    const EnvMoments m = env_moments(example_env(k), 2.0);
    EXPECT_NEAR(m.inv_a_p, 4.0 / 49 + 4864 * k / 441, 1e-13);
    EXPECT_NEAR(m.one_plus_inv_sum_p, 64.0 / 49 + 2560 * k / 441, 1e-13);
  }
  EXPECT_THROW(env_moments(EnvSpec::orrw(2, 2.0), 2.0), Unsupported);
}

TEST(Theta, ExampleValues) {
  const double k = 1.0 / 30;
  const double inv2 = 4.0 / 49 + 4864 * k / 441;
  const double sum2 = 64.0 / 49 + 2560 * k / 441;
  EXPECT_NEAR(theta(example_env(), 2, 1), 2 * sum2, 1e-12);
  EXPECT_NEAR(theta(example_env(), 2, 2), 2 * 2 * sum2 * 2 * (1 + inv2), 1e-12);
  EXPECT_NEAR(theta(example_env(), 2, 3), 2 * 2 * sum2 * 3 * (1 + inv2 + inv2 * inv2), 1e-12);
}

TEST(SpeedBound, ExampleHeadline) {
  const double alpha = (117 + 468.0 / 30) / (637 - 556.0 / 30);
  const SpeedBounds s = speed_bounds(example_env(), alpha);
  ASSERT_TRUE(s.lower.applicable);
  EXPECT_NEAR(s.lower.value, 0.12299115, 5e-9);
  EXPECT_NEAR(s.lower.value, static_cast<double>(example_speed_oracle(1.0L / 30)), 1e-12);
  EXPECT_GE(s.lower.value, 0.1229 - 2e-4);
  EXPECT_LE(s.lower.value, 0.1229 + 6e-4);
  EXPECT_FALSE(s.upper.applicable);
}

TEST(SpeedBound, ExampleOracleAcrossKappa) {
  for (double k : {0.1, 0.25, 0.5}) {
    const double alpha = (117 + 468 * k) / (637 - 556 * k);
    const SpeedBounds s = speed_bounds(example_env(k), alpha);
    ASSERT_TRUE(s.lower.applicable);
    EXPECT_NEAR(s.lower.value / static_cast<double>(example_speed_oracle(k)), 1.0, 1e-11) << k;
  }
}

TEST(SpeedBound, OrrwBranches) {
  const SpeedBounds a = speed_bounds(EnvSpec::orrw(2, 2.0), 0.9);
  EXPECT_NEAR(a.theorem.value, 0.01 * 0.5, 1e-15);
  EXPECT_FALSE(a.comparison.applicable);
  EXPECT_NEAR(a.upper.value, 0.5, 1e-15);
  EXPECT_EQ(a.lower.value, a.theorem.value);

  const SpeedBounds b = speed_bounds(EnvSpec::orrw(3, 1.5), 0.2);
  EXPECT_NEAR(b.comparison.value, 1.5 / 4.5, 1e-15);
  EXPECT_NEAR(b.theorem.value, 0.64 * 3 / 4.5, 1e-15);
  EXPECT_EQ(b.lower.value, b.theorem.value);

  const SpeedBounds c = speed_bounds(EnvSpec::orrw(2, 1.0), 0.5);
  EXPECT_FALSE(c.theorem.applicable);
  EXPECT_NE(c.theorem.reason.find("delta > 1"), std::string::npos);
  EXPECT_NEAR(c.lower.value, 1.0 / 3, 1e-15);
}

TEST(LocalTimeBound, OrrwGeometricDomination) {
  const BoundValue v = l_rho_moment_bound(EnvSpec::orrw(2, 2.0), 2, 1, 0.5);
  ASSERT_TRUE(v.applicable);
  const double q = 0.5 * 2 / 4.0;
  EXPECT_NEAR(v.value, (2 - q) / (q * q), 1e-12);
  EXPECT_FALSE(l_rho_moment_bound(EnvSpec::orrw(2, 1.0), 1, 1, 0.5).applicable);
  EXPECT_FALSE(l_rho_moment_bound(example_env(), 1, 1, 1.0).applicable);
}

TEST(LocalTimeBound, ZeroAlphaKeepsOnlyFirstTerm) {
  const BoundValue v = l_rho_moment_bound(example_env(), 1, 1, 0.0);
  ASSERT_TRUE(v.applicable);
  EXPECT_NEAR(v.value, std::sqrt(theta(example_env(), 2, 1)), 1e-14);
}

TEST(Ell1Bounds, TailAndSecondMoment) {
  EXPECT_DOUBLE_EQ(ell1_tail_bound(1, 0.4), 1.0);
  EXPECT_NEAR(ell1_tail_bound(3, 0.4), 0.16, 1e-16);
  EXPECT_THROW(ell1_tail_bound(0, 0.4), DomainError);
  EXPECT_THROW(ell1_tail_bound(2, 1.0), DomainError);
  for (double g : {0.0, 0.2, 0.41651912823651516, 0.9}) {
    for (int s : {1, 3, 7}) {
      // sum_k (2k-1) P(l >= k) with P(l >= k) <= gamma^(ceil(k/s) - 2)^+.
      long double oracle = 0.0L;
      for (long k = 1; k < 200000; ++k) {
        const long n = (k + s - 1) / s;
        const long double tail = n <= 2 ? 1.0L : std::pow(static_cast<long double>(g), n - 2);
        oracle += (2 * k - 1) * tail;
        if (tail < 1e-30L) break;
      }
      const BoundValue b = ell1_second_moment_bound(g, 1, s);
      ASSERT_TRUE(b.applicable);
      EXPECT_NEAR(b.value / static_cast<double>(oracle), 1.0, 1e-9) << g << " " << s;
    }
  }
}

TEST(PiBound, LyapunovAndLimits) {
  const double g = 0.41651912823651516, a = 0.2144;
  const BoundValue one = pi_moment_bound(1.0, g, 1, 3, a);
  const BoundValue half = pi_moment_bound(0.5, g, 1, 3, a);
  const BoundValue two = pi_moment_bound(2.0, g, 1, 3, a);
  ASSERT_TRUE(one.applicable && half.applicable && two.applicable);
  EXPECT_GE(one.value, 2.0);  // Pi >= l_1 + 1 >= 2
  EXPECT_LE(half.value, std::sqrt(one.value) * (1 + 1e-12));
  EXPECT_GE(two.value, 4.0);
  const BoundValue z1 = pi_moment_bound(1.0, 0.0, 1, 1, a);
  ASSERT_TRUE(z1.applicable);
  EXPECT_NEAR(z1.value, std::sqrt(geometric_moment(2, 1 - a)), 1e-12);
  EXPECT_FALSE(pi_moment_bound(1.0, 1.0, 1, 3, a).applicable);
}

TEST(Tau1Bound, FiniteOnTheExample) {
  const double g = 0.41651912823651516, a = 0.21440120728683834;
  const BoundValue t1 = tau1_moment_bound(example_env(), 1, 1, g, 1, 3, a);
  const BoundValue t2 = tau1_moment_bound(example_env(), 2, 1, g, 1, 3, a);
  ASSERT_TRUE(t1.applicable && t2.applicable);
  EXPECT_TRUE(std::isfinite(t1.value));
  EXPECT_GE(t1.value, 1.0);
  EXPECT_TRUE(std::isfinite(t2.value));
  EXPECT_GE(t2.value, 1.0);
}

TEST(Covariance, EvenExponent) {
  EXPECT_EQ(covariance_a(0.12299115), 26);
  EXPECT_EQ(covariance_a(1.0), 4);
  EXPECT_EQ(covariance_a(0.5), 8);
  EXPECT_EQ(covariance_a(3.0 / 7.0), 8);
  EXPECT_EQ(covariance_a(3.0), 2);
  EXPECT_THROW(covariance_a(0.0), DomainError);
}

TEST(Covariance, ExampleBoundsAreOrdered) {
  const double g = 0.41651912823651516, a = 0.21440120728683834, w = 0.12299114920883172;
  const CovarianceBounds c = covariance_bounds(example_env(), w, a, g, 1, 3);
  EXPECT_EQ(c.a, 26);
  ASSERT_TRUE(c.lower.applicable && c.upper.applicable);
  EXPECT_GT(c.lower.value, 0.0);
  EXPECT_LT(c.lower.value, c.upper.value);
  EXPECT_NEAR(c.upper.value, (c.ell1_sq.value + c.tau1_sq.value) / (1 - a), 1e-6 * c.upper.value);
  // b E[w_child^(a/2)] E[w_par^(a/2-1) (1 - w_par)] with identical coordinates.
  const double k = 1.0 / 30;
  double child = 0, par = 0;
  for (auto [A, p] : {std::pair{0.3, k}, std::pair{3.5, 1 - k}}) {
    const double wp = 1 / (1 + 2 * A), wc = A / (1 + 2 * A);
    child += p * std::pow(wc, 13);
    par += p * std::pow(wp, 12) * (1 - wp);
  }
  EXPECT_NEAR(c.event_prob.value / (2 * child * par), 1.0, 1e-12);
}

TEST(ComputeBounds, ExampleReportIsFullyApplicable) {
  BoundsParams p;
  p.psi = 1;
  const BoundsReport r = compute_bounds(example_env(), p);
  EXPECT_TRUE(r.all_applicable());
  EXPECT_NEAR(r.alpha_used, 0.2144012, 1e-7);
  EXPECT_NEAR(r.gamma_used, 0.41652, 1e-5);
  EXPECT_EQ(r.ell1_scale, 3);
  EXPECT_NEAR(r.speed.lower.value, 0.12299115, 5e-9);
  ASSERT_EQ(r.ell1_tail.size(), 5u);
  EXPECT_EQ(r.transience.verdict, Transience::transient);
}

TEST(ComputeBounds, AutomaticPsiForExample) {
  const BoundsReport r = compute_bounds(example_env(), BoundsParams{});
  ASSERT_TRUE(r.selection.ok);
  EXPECT_EQ(r.selection.psi, 1);
  EXPECT_EQ(r.offspring->provenance, Provenance::exact);
}

TEST(ComputeBounds, OrrwDeltaOneIsGated) {
  BoundsParams p;
  p.psi = 4;
  p.offspring_samples = 5000;
  const BoundsReport r = compute_bounds(EnvSpec::orrw(2, 1.0), p);
  EXPECT_FALSE(r.speed.theorem.applicable);
  EXPECT_FALSE(r.l_rho.applicable);
  EXPECT_FALSE(r.all_applicable());
}

TEST(ComputeBounds, RecurrentEnvironmentHasNoBounds) {
  const BoundsReport r = compute_bounds(EnvSpec::rwre(2, {{0.2, 1.0}}), BoundsParams{});
  EXPECT_EQ(r.transience.verdict, Transience::recurrent);
  EXPECT_FALSE(r.selection.ok);
  EXPECT_FALSE(r.speed.lower.applicable);
  EXPECT_FALSE(r.all_applicable());
}
