#pragma once
// Beam-misalignment probability: imperfect-sensing term plus association timeout.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "pattern.hpp"
#include "quadrature.hpp"
#include "sensing.hpp"
#include "specfun.hpp"

namespace isac_thz {

struct MisalignmentBreakdown {
  double p_err = 0.0;  // imperfect-sensing term
  double p_to = 0.0;   // both nearest BSs blocked
  double p_ms = 0.0;   // min(p_err + p_to, 1)
  double mu_g = 0.0;   // beam-switch boundary density along the track, 1/m
  double w1 = 0.0;     // 1/m
  double w2 = 0.0;
};

// Probability that a link of length r is cut by a blocker or MT.
inline double blockage_probability(const Deployment& d, double r) {
  if (!(r >= 2.0 * d.r_b)) throw domain_error("blockage_probability: r must be >= 2 r_b");
  return -std::expm1(-d.lambda_obstacles() * (r - 2.0 * d.r_b) * 2.0 * d.r_b);
}

inline double beam_switch_density(const Deployment& d) {
  return d.n_b * std::sqrt(d.lambda_b) / pi;
}

inline QuadratureSpec misalignment_quadrature() {
  QuadratureSpec q;
  q.rel_tol = 1e-12;
  return q;
}

// Mass of the second-nearest-BS density beyond r1 weighted by blockage:
// int_{r1}^inf p_B(r2) e^{-lambda_B pi r2^2} r2 dr2.
inline double timeout_inner(const Deployment& d, double r1, const QuadratureSpec& spec) {
  const double scale = 1.0 / std::sqrt(d.lambda_b * pi);
  auto f = [&](double r2) {
    return blockage_probability(d, r2) * std::exp(-d.lambda_b * pi * r2 * r2) * r2;
  };
  return integrate_semi_infinite(f, r1, spec, scale).value;
}

// Both the nearest and the second-nearest BS blocked, links blocked independently.
inline double timeout_probability(const Deployment& d, const QuadratureSpec& spec = misalignment_quadrature()) {
  if (!(d.lambda_b > 0.0)) throw domain_error("timeout_probability: lambda_b must be > 0");
  if (d.lambda_obstacles() == 0.0) return 0.0;
  QuadratureSpec inner = spec;
  inner.rel_tol = spec.rel_tol / 10.0;
  const double scale = 1.0 / std::sqrt(d.lambda_b * pi);
  auto outer = [&](double r1) { return r1 * blockage_probability(d, r1) * timeout_inner(d, r1, inner); };
  const double pref = 2.0 * d.lambda_b * pi;
  const double v = pref * pref * integrate_semi_infinite(outer, 2.0 * d.r_b, spec, scale).value;
  return std::clamp(v, 0.0, 1.0);
}

// Probability the tracked speed lags the true speed enough to cross a beam
// boundary unnoticed within one SSB period.
inline double speed_underestimate_probability(const Deployment& d, const SensingAbility& a, double tau) {
  if (!(d.v >= 0.0)) throw domain_error("speed_underestimate_probability: v must be >= 0");
  const double mu = beam_switch_density(d);
  const double lag = std::max((d.v - a.delta_v) * tau - a.delta_db, 0.0);
  return std::max(std::exp(-mu * lag) - std::exp(-mu * d.v * tau), 0.0);
}

struct ClosestBlockageTerms {
  double w1 = 0.0;
  double w2 = 0.0;
};

inline ClosestBlockageTerms closest_blockage_terms(const Deployment& d) {
  const double sl = std::sqrt(d.lambda_b * pi);
  ClosestBlockageTerms t;
  t.w1 = d.lambda_obstacles() * 2.0 * d.r_b;
  t.w2 = 2.0 * d.r_b * sl + t.w1 / (2.0 * sl);
  return t;
}

// e^{2 r_b w1 + w1^2/(4 lambda_B pi)} [e^{-w2^2} - w1/(2 sqrt(lambda_B)) erfc(w2)],
// the unblocked mass of the nearest-BS density over r >= 2 r_b, evaluated literally.
inline double closest_blockage_bracket(const Deployment& d) {
  const auto t = closest_blockage_terms(d);
  return std::exp(2.0 * d.r_b * t.w1 + t.w1 * t.w1 / (4.0 * d.lambda_b * pi)) *
         (std::exp(-t.w2 * t.w2) - t.w1 / (2.0 * std::sqrt(d.lambda_b)) * isac_thz::erfc(t.w2));
}

// The literal "1 - bracket" rendering. It counts r1 < 2 r_b as blocked; kept
// only to report its gap from the defining integral.
inline double closest_blockage_bracket_form(const Deployment& d) { return 1.0 - closest_blockage_bracket(d); }

// E[p_B(r1)] over the nearest-BS distance on r1 >= 2 r_b.
// Equal to e^{-4 pi lambda_B r_b^2} - bracket, rewritten with erfcx so it stays
// accurate when the bracket's exponentials overflow.
inline double expected_closest_blockage(const Deployment& d) {
  if (!(d.lambda_b > 0.0)) throw domain_error("expected_closest_blockage: lambda_b must be > 0");
  const auto t = closest_blockage_terms(d);
  if (t.w1 == 0.0) return 0.0;
  return std::exp(-4.0 * pi * d.lambda_b * d.r_b * d.r_b) * t.w1 / (2.0 * std::sqrt(d.lambda_b)) *
         erfcx(t.w2);
}

// Direct quadrature of the defining integral; the reference for the closed form.
inline double closest_blockage_quadrature(const Deployment& d, const QuadratureSpec& spec = misalignment_quadrature()) {
  auto f = [&](double r) {
    return blockage_probability(d, r) * two_pi * d.lambda_b * r * std::exp(-d.lambda_b * pi * r * r);
  };
  return integrate_semi_infinite(f, 2.0 * d.r_b, spec, 1.0 / std::sqrt(d.lambda_b * pi)).value;
}

inline MisalignmentBreakdown beam_misalignment(const Deployment& d, const SensingAbility& a, double tau) {
  MisalignmentBreakdown m;
  const auto t = closest_blockage_terms(d);
  m.mu_g = beam_switch_density(d);
  m.w1 = t.w1;
  m.w2 = t.w2;
  m.p_err = speed_underestimate_probability(d, a, tau) * (1.0 - expected_closest_blockage(d));
  m.p_to = timeout_probability(d);
  m.p_ms = std::min(m.p_err + m.p_to, 1.0);
  return m;
}

enum class Scheme { jsrs, perfect, fiveg, ssb };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::jsrs: return "jsrs";
    case Scheme::perfect: return "perfect";
    case Scheme::fiveg: return "5g";
    case Scheme::ssb: return "ssb";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "jsrs") return Scheme::jsrs;
  if (name == "perfect") return Scheme::perfect;
  if (name == "5g" || name == "fiveg") return Scheme::fiveg;
  if (name == "ssb") return Scheme::ssb;
  throw parse_error("unknown scheme '" + name + "' (expected jsrs, perfect, 5g, ssb)");
}

inline PatternRequirement requirement_from(const Config& c) {
  return {c.d_max_req, c.v_max_req, c.sys.n_rs};
}

// Sensing ability a scheme delivers under the given configuration.
inline SensingAbility scheme_ability(Scheme s, const Config& c) {
  const double theta_b = c.deploy.theta_b();
  switch (s) {
    case Scheme::jsrs: {
      auto p = optimal_pattern(requirement_from(c), c.sys, theta_b);
      return sensing_ability(p, c.sys, theta_b);
    }
    case Scheme::perfect: return perfect_ability();
    case Scheme::fiveg: return baseline_5g_ability();
    case Scheme::ssb: return ssb_ability(c.sys, theta_b);
  }
  throw std::logic_error("scheme_ability: unhandled scheme");
}

inline MisalignmentBreakdown scheme_misalignment(Scheme s, const Config& c) {
  return beam_misalignment(c.deploy, scheme_ability(s, c), c.sys.tau);
}

}  // namespace isac_thz
