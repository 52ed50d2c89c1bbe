#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "isac_thz/constants.hpp"
#include "isac_thz/quadrature.hpp"

using namespace isac_thz;

TEST(Adaptive, PolynomialIsExact) {
  auto r = integrate_adaptive<double>([](double x) { return x * x * x - 2.0 * x; }, 0.0, 3.0, {});
  EXPECT_NEAR(r.value, 81.0 / 4.0 - 9.0, 1e-13);
}

TEST(Adaptive, PeakedIntegrandAgreesWithBoost) {
  auto f = [](double x) { return 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)); };
  const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 30, 1e-14);
  EXPECT_NEAR(integrate_adaptive<double>(f, 0.0, 1.0, {}).value / ref, 1.0, 1e-10);
}

TEST(Adaptive, PairIntegratesComponentwise) {
  auto r = integrate_adaptive<Pair>([](double x) { return Pair{std::cos(x), std::sin(x)}; }, 0.0, pi / 2, {});
  EXPECT_NEAR(r.value.a, 1.0, 1e-13);
  EXPECT_NEAR(r.value.b, 1.0, 1e-13);
}

TEST(Adaptive, ReportsNonConvergence) {
  QuadratureSpec spec;
  spec.max_subdivisions = 2;
  EXPECT_THROW(integrate_adaptive<double>([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, spec),
               convergence_error);
}

TEST(SemiInfinite, Exponential) {
  EXPECT_NEAR(integrate_semi_infinite([](double x) { return std::exp(-x); }, 0.0, {}).value, 1.0, 1e-12);
}

TEST(SemiInfinite, GaussianTailAgainstErfc) {
  auto r = integrate_semi_infinite([](double x) { return std::exp(-x * x); }, 1.0, {}, 0.5);
  EXPECT_NEAR(r.value, 0.5 * std::sqrt(pi) * std::erfc(1.0), 1e-13);
}

TEST(SemiInfinite, ArctanIdentity) {
  // int_0^inf sin(2 pi x) e^-x / x dx = arctan(2 pi)
  auto r = integrate_semi_infinite(
      [](double x) { return x == 0.0 ? two_pi : std::sin(two_pi * x) * std::exp(-x) / x; }, 0.0, {});
  EXPECT_NEAR(r.value / pi, 0.44976077178312396, 1e-11);
}

TEST(SineKernel, DirichletIntegral) {
  // int_0^inf sin(s) / (pi s) ds = 1/2
  auto r = integrate_sine_kernel([](double) { return 1.0; }, [](double s) { return s; }, 1.0, 0.0, {});
  EXPECT_NEAR(r.value, 0.5, 1e-9);
}

TEST(SineKernel, DampedSineMatchesArctan) {
  auto r = integrate_sine_kernel([](double s) { return std::exp(-s); }, [](double s) { return two_pi * s; },
                                 std::nullopt, 0.0, {});
  EXPECT_NEAR(r.value, 0.44976077178312396, 1e-10);
}

TEST(SineKernel, GilPelaezExponentialCdf) {
  // Exp(1) has CF 1/(1 - i t); inversion gives P(X < x) - 1/2.
  for (double x : {0.2, 1.0, 2.5, 6.0}) {
    // t - atan(t) cancels badly near 0, so the phase switches to its series there.
    auto phase = [x](double t) {
      if (t >= 1e-2) return t * x - std::atan(t);
      const double t2 = t * t;
      return (x - 1.0) * t + t * t2 * (1.0 / 3 - t2 * (1.0 / 5 - t2 * (1.0 / 7 - t2 / 9)));
    };
    auto r = integrate_sine_kernel([](double t) { return 1.0 / std::sqrt(1.0 + t * t); }, phase, x - 1.0, 0.0, {});
    EXPECT_NEAR(r.value, 0.5 - std::exp(-x), 1e-8) << "x = " << x;
  }
}

TEST(SineKernel, NegativeSlopeFlipsSign) {
  auto r = integrate_sine_kernel([](double) { return 1.0; }, [](double s) { return -3.0 * s; }, -3.0, 0.0, {});
  EXPECT_NEAR(r.value, -0.5, 1e-9);
}

TEST(SineKernel, ZeroPhaseGivesZero) {
  auto r = integrate_sine_kernel([](double) { return 1.0; }, [](double) { return 0.0; }, 0.0, 0.0, {});
  EXPECT_EQ(r.value, 0.0);
}

TEST(Oscillatory, DifferenceOfKernels) {
  OscillatoryIntegrand f;
  f.envelope = [](double s) { return std::exp(-s); };
  f.phase_hi = [](double s) { return two_pi * s; };
  f.phase_lo = [](double s) { return -two_pi * s; };
  auto r = integrate_oscillatory(f, 0.0, {});
  EXPECT_NEAR(r.value, 2.0 * 0.44976077178312396, 2e-10);
}

TEST(QuadratureSpec, Validates) {
  QuadratureSpec s;
  s.rel_tol = 0.0;
  EXPECT_THROW(s.validate(), validation_error);
}
