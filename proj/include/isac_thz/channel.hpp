#pragma once
// THz link budget, noise terms and per-interferer probabilities.

#include <cmath>

#include "config.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "specfun.hpp"

namespace isac_thz {

struct LinkBudget {
  double A = 0.0;        // P_T G_b G_m c^2 / (16 pi^2 f_c^2), W m^2
  double K = 0.0;        // 1/m
  double G_b = 2.0;
  double G_m = 2.0;
  double theta_b = 0.0;  // rad
  double theta_m = 0.0;  // rad
};

// Ideal cone antenna of full beamwidth theta. theta = pi is the hemisphere, gain 2.
inline double antenna_gain(double theta) {
  if (!(theta > 0.0 && theta <= pi)) throw domain_error("antenna_gain: theta must be in (0, pi]");
  return 2.0 / (1.0 - std::cos(0.5 * theta));
}

inline LinkBudget make_link_budget(const SystemParams& sys, const Deployment& deploy) {
  LinkBudget b;
  b.theta_b = deploy.theta_b();
  b.theta_m = deploy.theta_m();
  b.G_b = antenna_gain(b.theta_b);
  b.G_m = antenna_gain(b.theta_m);
  b.K = sys.k;
  const double c = speed_of_light;
  b.A = sys.p_t * b.G_b * b.G_m * c * c / (16.0 * pi * pi * sys.f_c * sys.f_c);
  return b;
}

inline double received_power(const LinkBudget& b, double r) {
  if (!(r > 0.0)) throw domain_error("received_power: r must be > 0");
  return b.A / (r * r) * std::exp(-b.K * r);
}

// Share of the absorbed power re-radiated as noise toward the receiver.
inline double absorption_noise_factor(const LinkBudget& b, const Deployment& d) {
  return b.K / (static_cast<double>(d.n_b) * d.n_m);
}

// Fraction of time an interferer's beam can point at the typical MT: the beam
// sweep window plus the misaligned share of the data window.
inline double beam_phase_fraction(const Deployment& d, const SystemParams& sys, double p_ms) {
  const double sweep = d.n_b * sys.t_ssb / sys.tau;
  if (sweep > 1.0) throw validation_error("n_b * t_ssb must not exceed tau");
  if (!(p_ms >= 0.0 && p_ms <= 1.0)) throw domain_error("p_ms must be in [0, 1]");
  return sweep + (1.0 - sweep) * p_ms;
}

// Weight w_s: phase fraction times beam-orientation overlap.
inline double beam_weight(const Deployment& d, const SystemParams& sys, double p_ms) {
  return beam_phase_fraction(d, sys, p_ms) * d.theta_b() * d.theta_m() / (4.0 * pi * pi);
}

inline double interference_probability(const Deployment& d, const SystemParams& sys, double r,
                                       double p_ms) {
  if (!(r >= 2.0 * d.r_b)) throw domain_error("interference_probability: r must be >= 2 r_b");
  const double unblocked = std::exp(-d.lambda_all() * (r - 2.0 * d.r_b) * 2.0 * d.r_b);
  return beam_weight(d, sys, p_ms) * unblocked;
}

// Mean interference from interferers beyond r1.
inline double expected_interference(const LinkBudget& b, const Deployment& d,
                                    const SystemParams& sys, double r1, double p_ms) {
  if (!(r1 >= 2.0 * d.r_b)) throw domain_error("expected_interference: r1 must be >= 2 r_b");
  const double w = beam_weight(d, sys, p_ms);
  if (d.lambda_b == 0.0 || w == 0.0) return 0.0;
  const double lam = d.lambda_all();
  return two_pi * d.lambda_b * w * std::exp(4.0 * lam * d.r_b * d.r_b) * b.A *
         exp_integral_e1((2.0 * lam * d.r_b + b.K) * r1);
}

// Thermal noise plus mean molecular-absorption noise from BSs beyond r1.
inline double expected_noise(const LinkBudget& b, const Deployment& d, const SystemParams& sys,
                             double r1) {
  if (!(r1 > 0.0)) throw domain_error("expected_noise: r1 must be > 0");
  if (b.K == 0.0 || d.lambda_b == 0.0) return sys.thermal_noise();
  return sys.thermal_noise() +
         two_pi * d.lambda_b * b.A * absorption_noise_factor(b, d) * exp_integral_e1(b.K * r1);
}

// Thermal noise plus the serving link's own absorption noise.
inline double effective_noise(const LinkBudget& b, const Deployment& d, const SystemParams& sys,
                              double r1) {
  if (!(r1 > 0.0)) throw domain_error("effective_noise: r1 must be > 0");
  return sys.thermal_noise() + absorption_noise_factor(b, d) * received_power(b, r1);
}

}  // namespace isac_thz
