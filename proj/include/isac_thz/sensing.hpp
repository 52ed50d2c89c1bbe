#pragma once
// OFDM sensing abilities: resolutions and unambiguous ranges of a reference-signal pattern.

#include <algorithm>
#include <cmath>
#include <optional>

#include "config.hpp"
#include "constants.hpp"
#include "errors.hpp"

namespace isac_thz {

struct SensingPattern {
  double alpha = 0.5;  // time-to-frequency split of the RS budget
  int U = 1;           // subcarrier spacing of RS inserts
  int V = 1;           // symbol spacing of RS inserts
  long N_s = 1;        // RS symbols
  long N_f = 1;        // RS subcarriers
  double B_s = 0.0;    // Hz
  double T_s = 0.0;    // s
  bool fits_budget = true;  // B_s <= B_tot and T_s <= T_tot
};

// Unbounded ranges (baselines that do not constrain them) are std::nullopt.
struct SensingAbility {
  double delta_r = 0.0;   // longitudinal resolution, m
  double delta_db = 0.0;  // transverse motion resolution, m
  double delta_v = 0.0;   // velocity resolution, m/s
  std::optional<double> d_max;  // m
  std::optional<double> v_max;  // m/s
};

// Mean ratio of transverse to longitudinal resolution over random crossing angles.
inline double a_theta(double theta_b) {
  if (!(theta_b > 0.0 && theta_b < 0.5 * pi)) throw domain_error("a_theta: theta_b must be in (0, pi/2)");
  const double c = std::cos(theta_b);
  return std::sin(theta_b) / (pi - 2.0 * theta_b) * std::log((1.0 + c) / (1.0 - c));
}

inline long round_count(double x) { return std::max(1L, std::lround(x)); }

// Rounds the continuous split to integer symbol and subcarrier counts.
inline SensingPattern make_pattern(double alpha, int U, int V, const SystemParams& sys) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("make_pattern: alpha must be in (0, 1)");
  if (U < 1 || V < 1) throw domain_error("make_pattern: U and V must be >= 1");
  SensingPattern p;
  p.alpha = alpha;
  p.U = U;
  p.V = V;
  const double n = static_cast<double>(sys.n_rs);
  p.N_s = round_count(std::pow(n, alpha));
  p.N_f = round_count(std::pow(n, 1.0 - alpha));
  p.B_s = p.N_f * sys.f_scs;
  p.T_s = p.N_s * sys.t_sym;
  p.fits_budget = p.B_s <= sys.b_tot && p.T_s <= sys.t_tot;
  return p;
}

// Ability from explicit bandwidth and duration; the pattern overload forwards here.
inline SensingAbility sensing_ability(int U, int V, double B_s, double T_s, double f_c,
                                      const SystemParams& sys, double theta_b) {
  if (U < 1 || V < 1) throw domain_error("sensing_ability: U and V must be >= 1");
  if (!(B_s > 0.0 && T_s > 0.0 && f_c > 0.0)) throw domain_error("sensing_ability: B_s, T_s, f_c must be > 0");
  const double c = speed_of_light;
  SensingAbility a;
  a.delta_r = c / (2.0 * U * B_s);
  a.delta_db = a_theta(theta_b) * a.delta_r;
  a.d_max = c / (2.0 * U * sys.f_scs);
  a.delta_v = c / (2.0 * f_c * V * T_s);
  a.v_max = std::min(U * c * sys.f_scs / (20.0 * f_c), c / (2.0 * f_c * V * sys.t_sym));
  return a;
}

inline SensingAbility sensing_ability(const SensingPattern& p, const SystemParams& sys, double theta_b) {
  return sensing_ability(p.U, p.V, p.B_s, p.T_s, sys.f_c, sys, theta_b);
}

// Single SSB burst used for sensing, one subcarrier spacing in range.
inline SensingAbility ssb_ability(const SystemParams& sys, double theta_b) {
  const double c = speed_of_light;
  SensingAbility a;
  a.delta_r = c / (2.0 * sys.b_ssb);
  a.delta_db = a_theta(theta_b) * a.delta_r;
  a.delta_v = c / (2.0 * sys.f_c * sys.t_ssb);
  a.d_max = c / (2.0 * sys.f_scs);
  a.v_max = std::nullopt;
  return a;
}

// Resolution requirement of general V2X use cases; ranges are not constrained.
inline SensingAbility baseline_5g_ability() {
  SensingAbility a;
  a.delta_r = 0.3;
  a.delta_db = 0.3;
  a.delta_v = 1.0;
  return a;
}

inline SensingAbility perfect_ability() { return SensingAbility{}; }

}  // namespace isac_thz
