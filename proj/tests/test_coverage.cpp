#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "isac_thz/coverage.hpp"
#include "isac_thz/mcsim.hpp"

using namespace isac_thz;

namespace {

// Interference-limited deployment: wide beams, dense BSs, few obstacles.
Config stressed() {
  Config c;
  c.deploy.n_b = c.deploy.n_m = 8;
  c.deploy.lambda_b = 0.01;
  c.deploy.lambda_s = 0.002;
  c.deploy.lambda_m = 0.001;
  return c;
}

// f_r and f_i straight from their radial definitions, panel by panel in log r.
std::pair<double, double> brute_parts(double s, const LinkBudget& b, const Deployment& d, const SystemParams& sys,
                                      double p_ms, double lower) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double kappa = absorption_noise_factor(b, d);
  auto p_i = [&](double r) { return interference_probability(d, sys, r, p_ms); };
  auto gain = [&](double r) { return std::exp(-b.K * r) / (r * r); };
  auto fr = [&](double r) {
    const double x1 = two_pi * s * b.A * (1.0 + kappa) * gain(r);
    const double x0 = two_pi * s * b.A * kappa * gain(r);
    const double h1 = std::sin(0.5 * x1), h0 = std::sin(0.5 * x0);
    return r * (2.0 * h1 * h1 * p_i(r) + 2.0 * h0 * h0 * (1.0 - p_i(r)));
  };
  auto fi = [&](double r) {
    const double x1 = two_pi * s * b.A * (1.0 + kappa) * gain(r);
    const double x0 = two_pi * s * b.A * kappa * gain(r);
    return r * (std::sin(x1) * p_i(r) + std::sin(x0) * (1.0 - p_i(r)));
  };
  double a = lower, re = 0.0, im = 0.0;
  while (a < 2e5) {
    const double e = a * 1.02;
    re += GK::integrate(fr, a, e, 12, 1e-13);
    im += GK::integrate(fi, a, e, 12, 1e-13);
    a = e;
  }
  return {re, im};
}

}  // namespace

TEST(ShotNoise, MatchesRadialDefinition) {
  const Config c = stressed();
  const auto b = make_link_budget(c.sys, c.deploy);
  const double p_ms = 0.2;
  for (double lower : {1.0, 20.0}) {
    ShotNoiseField f(b, c.deploy, c.sys, p_ms, lower);
    for (double s : {1e6, 1e8, 1e9, 1e10, 1e11}) {
      const auto p = f.parts(s);
      const auto [re, im] = brute_parts(s, b, c.deploy, c.sys, p_ms, lower);
      EXPECT_NEAR(p.f_r / re, 1.0, 1e-7) << "s = " << s << " L = " << lower;
      EXPECT_NEAR(p.f_i / im, 1.0, 1e-7) << "s = " << s << " L = " << lower;
    }
  }
}

TEST(ShotNoise, VanishesNearZeroAndForZeroAmplitude) {
  Config c;
  const auto b = make_link_budget(c.sys, c.deploy);
  ShotNoiseField f(b, c.deploy, c.sys, 0.1, 1.0);
  // Real part vanishes quadratically, imaginary part linearly.
  const auto a = f.parts(1e-3), tiny = f.parts(1e-4);
  EXPECT_NEAR(a.f_r / tiny.f_r, 100.0, 1e-4);
  EXPECT_NEAR(a.f_i / tiny.f_i, 10.0, 1e-6);
  auto silent = b;
  silent.A = 0.0;
  ShotNoiseField z(silent, c.deploy, c.sys, 0.1, 1.0);
  EXPECT_EQ(z.parts(1e9).f_r, 0.0);
  EXPECT_EQ(z.parts(1e9).f_i, 0.0);
}

TEST(ShotNoise, RealPartNonNegative) {
  for (const Config& c : {Config{}, stressed()}) {
    const auto b = make_link_budget(c.sys, c.deploy);
    ShotNoiseField f(b, c.deploy, c.sys, 0.3, 1.0);
    for (double s = 1.0; s < 1e14; s *= 3.7) EXPECT_GE(f.parts(s).f_r, 0.0) << "s = " << s;
  }
}

TEST(ShotNoise, MeanKernelIsSlopeOfImaginaryPart) {
  const Config c = stressed();
  const auto b = make_link_budget(c.sys, c.deploy);
  ShotNoiseField f(b, c.deploy, c.sys, 0.2, 1.0);
  const double s = 1e2;
  EXPECT_NEAR(f.parts(s).f_i / (two_pi * s * f.mean_kernel()), 1.0, 1e-6);
}

TEST(ShotNoise, EvenAndOddUnderSignFlip) {
  // The radial definitions at -s are the reflections used by the folded inversion.
  const Config c = stressed();
  const auto b = make_link_budget(c.sys, c.deploy);
  for (double s : {3e8, 4e10}) {
    const auto [re_p, im_p] = brute_parts(s, b, c.deploy, c.sys, 0.2, 1.0);
    const auto [re_m, im_m] = brute_parts(-s, b, c.deploy, c.sys, 0.2, 1.0);
    EXPECT_NEAR(re_m / re_p, 1.0, 1e-12);
    EXPECT_NEAR(im_m / im_p, -1.0, 1e-12);
  }
}

TEST(Coverage, FoldedInversionMatchesTwoSidedSum) {
  // Wide beams and dense BSs so the characteristic function decays within a few
  // thousand periods; the two-sided sum rebuilds negative s from the parity of f_r, f_i.
  Config c;
  c.deploy.n_b = c.deploy.n_m = 4;
  c.deploy.lambda_b = 0.05;
  c.deploy.lambda_s = c.deploy.lambda_m = 0.0;
  c.sys.t_ssb = c.sys.tau / 4;
  const double p_ms = 1.0;
  const auto b = make_link_budget(c.sys, c.deploy);
  ShotNoiseField field(b, c.deploy, c.sys, p_ms, 2.0 * c.deploy.r_b);
  const double h = 0.025 / received_power(b, 5.0);
  const long n = 16000;
  std::vector<double> env(n + 1), phase(n + 1);
  for (long i = 1; i <= n; ++i) {
    const auto p = field.parts(i * h);
    env[i] = std::exp(-two_pi * c.deploy.lambda_b * p.f_r);
    phase[i] = -two_pi * c.deploy.lambda_b * p.f_i;
  }
  for (double r1 : {3.0, 5.0})
    for (double threshold : {1.0, 3.0}) {
      CoverageQuery q;
      q.r1 = r1;
      q.threshold = threshold;
      const double folded = coverage_probability_given(q, b, c.deploy, c.sys, p_ms).p_cm;
      const double level = received_power(b, r1) / threshold;
      const double noise = effective_noise(b, c.deploy, c.sys, r1);
      double sum = two_pi * level;  // s = 0 limit
      for (long i = 1; i <= n; ++i) {
        const double s = i * h;
        const double w = i == n ? 0.5 : 1.0;
        for (double sign : {1.0, -1.0}) {
          const std::complex<double> cf = env[i] * std::polar(1.0, sign * (phase[i] - two_pi * s * noise));
          const std::complex<double> shift = std::polar(1.0, two_pi * sign * s * level) - 1.0;
          sum += w * (shift * cf).imag() / (sign * s);
        }
      }
      EXPECT_NEAR(folded, sum * h / two_pi, 1e-4) << "r1 " << r1 << " threshold " << threshold;
    }
}

TEST(Coverage, TrivialLimits) {
  Config c;
  const auto b = make_link_budget(c.sys, c.deploy);
  CoverageQuery q;
  q.r1 = 20.0;
  q.threshold = 1e12;
  EXPECT_LT(coverage_probability_given(q, b, c.deploy, c.sys, 0.1).p_cvp, 1e-6);
  q.threshold = db_to_linear(5.0);
  const auto r = coverage_probability_given(q, b, c.deploy, c.sys, 1.0);
  EXPECT_EQ(r.p_cvp, 0.0);
  EXPECT_NEAR(r.p_cvp, (1.0 - r.p_ms) * r.p_cm, 0.0);
}

TEST(Coverage, RejectsInvalidQueries) {
  Config c;
  const auto b = make_link_budget(c.sys, c.deploy);
  CoverageQuery q;
  q.r1 = 0.5;
  EXPECT_THROW(coverage_probability_given(q, b, c.deploy, c.sys, 0.1), validation_error);
  q.r1 = 20.0;
  q.threshold = 0.0;
  EXPECT_THROW(coverage_probability_given(q, b, c.deploy, c.sys, 0.1), validation_error);
}

TEST(Coverage, SparseFieldIsAVoidProbability) {
  // No beam ever points at the user, so only absorption noise re-radiated by other
  // BSs competes with the margin; coverage fails iff some BS sits close enough.
  Config c;
  c.deploy.n_b = c.deploy.n_m = 4096;
  c.deploy.lambda_b = 1e-7;
  c.sys.t_ssb = 1e-12;
  const auto b = make_link_budget(c.sys, c.deploy);
  const double r1 = 20.0;
  const double lower = 2.0 * c.deploy.r_b;
  const double signal = received_power(b, r1);
  const double noise = effective_noise(b, c.deploy, c.sys, r1);
  const double kappa = absorption_noise_factor(b, c.deploy);
  for (double margin : {0.5, 2.0, 10.0}) {
    CoverageQuery q;
    q.r1 = r1;
    q.threshold = signal / (noise * margin);
    const auto r = coverage_probability_given(q, b, c.deploy, c.sys, 0.0);
    double expected = 0.0;
    if (margin > 1.0) {
      auto excess = [&](double rho) { return kappa * received_power(b, rho) - (margin - 1.0) * noise; };
      std::uintmax_t iters = 200;
      const auto [lo, hi] = boost::math::tools::toms748_solve(excess, lower, 1e4, boost::math::tools::eps_tolerance<double>(50), iters);
      const double rho = 0.5 * (lo + hi);
      expected = std::exp(-pi * c.deploy.lambda_b * (rho * rho - lower * lower));
    }
    EXPECT_NEAR(r.p_cm, expected, 1e-6) << "margin " << margin;
  }
}

TEST(Coverage, NonIncreasingInThreshold) {
  for (const Config& c : {Config{}, stressed()}) {
    std::vector<double> thresholds;
    for (double db = -10.0; db <= 30.0; db += 5.0) thresholds.push_back(db_to_linear(db));
    const auto rows = coverage_sweep(c, {10.0, 40.0}, thresholds, {Scheme::jsrs});
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t t = 1; t < thresholds.size(); ++t) {
        const auto& a = rows[g * thresholds.size() + t - 1];
        const auto& b = rows[g * thresholds.size() + t];
        EXPECT_LE(b.p_cvp, a.p_cvp + a.integral_abs_error + b.integral_abs_error) << "r1 " << b.r1 << " t " << t;
      }
  }
}

TEST(Coverage, SinglePointSweepMatchesDirectCall) {
  Config c;
  const auto rows = coverage_sweep(c, {20.0}, {db_to_linear(5.0)}, {Scheme::jsrs});
  ASSERT_EQ(rows.size(), 1u);
  CoverageQuery q;
  q.r1 = 20.0;
  q.threshold = db_to_linear(5.0);
  const auto direct = coverage_probability(q, make_link_budget(c.sys, c.deploy), c.deploy, c.sys,
                                           scheme_ability(Scheme::jsrs, c));
  EXPECT_NEAR(rows[0].p_cvp, direct.p_cvp, 1e-12);
  EXPECT_EQ(rows[0].p_ms, direct.p_ms);
}

TEST(Coverage, SweepOrderingAcrossSchemes) {
  Config c;
  const auto rows = coverage_sweep(c, {10.0, 40.0}, {1.0, db_to_linear(10.0)},
                                   {Scheme::perfect, Scheme::jsrs, Scheme::fiveg});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(rows[i].p_cvp, rows[4 + i].p_cvp);
    EXPECT_GE(rows[4 + i].p_cvp, rows[8 + i].p_cvp);
  }
}

TEST(Coverage, DenserBsDropsCoverageWhenInterferenceLimited) {
  Config c = stressed();
  double prev = 1.0, prev_err = 0.0;
  for (double lb : {0.005, 0.01, 0.02, 0.04}) {
    c.deploy.lambda_b = lb;
    const auto b = make_link_budget(c.sys, c.deploy);
    CoverageQuery q;
    q.r1 = 20.0;
    q.threshold = 1.0;
    const auto r = coverage_probability_given(q, b, c.deploy, c.sys, 0.2);
    EXPECT_LE(r.p_cvp, prev + prev_err + r.integral_abs_error) << "lambda_b " << lb;
    prev = r.p_cvp;
    prev_err = r.integral_abs_error;
  }
}

TEST(Coverage, MatchesMonteCarloWhenInterferenceLimited) {
  const Config c = stressed();
  const auto b = make_link_budget(c.sys, c.deploy);
  for (auto mode : {LowerBoundMode::theorem, LowerBoundMode::derivation}) {
    CoverageQuery q;
    q.r1 = 20.0;
    q.threshold = 1.0;
    q.lower_bound_mode = mode;
    const auto r = coverage_probability_given(q, b, c.deploy, c.sys, 0.2);
    McOptions opt;
    opt.lower_bound_mode = mode;
    const auto e = estimate_coverage_given(c.deploy, b, c.sys, 0.2, q.r1, q.threshold, 20000, 17, opt);
    EXPECT_LE(std::abs(e.mean - r.p_cvp), std::max(0.02, 3.0 * e.std_error)) << lower_bound_name(mode);
  }
}

TEST(Coverage, ModeNamesRoundTrip) {
  EXPECT_EQ(parse_lower_bound("theorem"), LowerBoundMode::theorem);
  EXPECT_EQ(parse_lower_bound("derivation"), LowerBoundMode::derivation);
  EXPECT_THROW(parse_lower_bound("both"), parse_error);
}
