#pragma once
// Optimal reference-signal pattern for tracking, and an exhaustive-search check of it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "sensing.hpp"

namespace isac_thz {

struct PatternRequirement {
  double d_max_req = 78.1;  // m, radius that must be detectable
  double v_max_req = kmh_to_mps(70.0);  // m/s, speed that must be trackable
  long n_rs = 5000;

  void validate() const {
    if (!(d_max_req > 0.0)) throw validation_error("requirement: d_max_req must be > 0");
    if (!(v_max_req > 0.0)) throw validation_error("requirement: v_max_req must be > 0");
    if (n_rs < 2) throw validation_error("requirement: n_rs must be >= 2");
  }
};

inline constexpr double alpha_lo = 0.01;
inline constexpr double alpha_hi = 0.99;

// Tracking error budget: distance travelled within one velocity cell over a
// period plus the transverse resolution.
inline double objective(double alpha, int U, int V, const SystemParams& sys, double theta_b) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("objective: alpha must be in (0, 1)");
  if (U < 1 || V < 1) throw domain_error("objective: U and V must be >= 1");
  const double c = speed_of_light;
  const double n = static_cast<double>(sys.n_rs);
  return c * sys.tau / (2.0 * sys.f_c * V * std::pow(n, alpha) * sys.t_sym) +
         c * a_theta(theta_b) / (2.0 * U * std::pow(n, 1.0 - alpha) * sys.f_scs);
}

struct PatternSplit {
  int U = 1;
  int V = 1;
  double alpha_unclamped = 0.5;
  double alpha = 0.5;
  bool clamped = false;
};

// Floors guarded against representation error at exact boundaries.
inline int guarded_floor(double x) { return static_cast<int>(std::floor(x * (1.0 + 1e-12))); }

inline PatternSplit optimal_split(const PatternRequirement& req, const SystemParams& sys, double theta_b) {
  req.validate();
  const double c = speed_of_light;
  PatternSplit out;
  const int U = guarded_floor(c / (2.0 * sys.f_scs * req.d_max_req));
  const int V = guarded_floor(c / (2.0 * sys.f_c * sys.t_sym * req.v_max_req));
  if (U < 1) throw infeasible_error("d_max_req exceeds the unambiguous range of a single subcarrier spacing");
  if (V < 1) throw infeasible_error("v_max_req exceeds the unambiguous velocity of a single symbol");
  const double u_doppler = 20.0 * sys.f_c * req.v_max_req / (c * sys.f_scs);
  if (U < u_doppler * (1.0 - 1e-12))
    throw infeasible_error("subcarrier spacing too small for the Doppler of v_max_req at this d_max_req");
  out.U = U;
  out.V = V;
  const double ratio = U * sys.f_scs * sys.tau / (V * sys.f_c * sys.t_sym * a_theta(theta_b));
  out.alpha_unclamped = 0.5 * (std::log(ratio) / std::log(static_cast<double>(req.n_rs)) + 1.0);
  out.alpha = std::clamp(out.alpha_unclamped, alpha_lo, alpha_hi);
  out.clamped = out.alpha != out.alpha_unclamped;
  return out;
}

inline SensingPattern optimal_pattern(const PatternRequirement& req, const SystemParams& sys, double theta_b) {
  const auto split = optimal_split(req, sys, theta_b);
  SystemParams s = sys;
  s.n_rs = req.n_rs;
  return make_pattern(split.alpha, split.U, split.V, s);
}

// Exhaustive search over an alpha grid on [alpha_lo, alpha_hi] and every (U, V)
// meeting both range requirements, within the documented search caps.
inline SensingPattern brute_force_pattern(const PatternRequirement& req, const SystemParams& sys,
                                          double theta_b, int grid_size) {
  req.validate();
  if (grid_size < 100) throw domain_error("brute_force_pattern: grid_size must be >= 100");
  const double c = speed_of_light;
  SystemParams s = sys;
  s.n_rs = req.n_rs;
  const double n = static_cast<double>(req.n_rs);
  const int u_cap = std::max(1, static_cast<int>(std::floor(c / (2.0 * sys.f_scs * 1.0))));
  const int v_cap = std::max(1, static_cast<int>(std::floor(c / (2.0 * sys.f_c * sys.t_sym * 0.1))));

  std::vector<double> alpha(grid_size), time_term(grid_size), freq_term(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    alpha[i] = alpha_lo + (alpha_hi - alpha_lo) * i / (grid_size - 1);
    time_term[i] = std::pow(n, -alpha[i]);
    freq_term[i] = std::pow(n, alpha[i] - 1.0);
  }
  const double a_th = a_theta(theta_b);
  const double time_coef = c * sys.tau / (2.0 * sys.f_c * sys.t_sym);
  const double freq_coef = c * a_th / (2.0 * sys.f_scs);

  auto key_less = [](const std::tuple<double, int, int, double>& a,
                     const std::tuple<double, int, int, double>& b) { return a < b; };
  std::tuple<double, int, int, double> best{std::numeric_limits<double>::infinity(), 0, 0, 0.0};
  for (int U = 1; U <= u_cap; ++U) {
    for (int V = 1; V <= v_cap; ++V) {
      const double d_max = c / (2.0 * U * sys.f_scs);
      const double v_max = std::min(U * c * sys.f_scs / (20.0 * sys.f_c), c / (2.0 * sys.f_c * V * sys.t_sym));
      if (d_max < req.d_max_req * (1.0 - 1e-12) || v_max < req.v_max_req * (1.0 - 1e-12)) continue;
      const double tc = time_coef / V;
      const double fc = freq_coef / U;
      for (int i = 0; i < grid_size; ++i) {
        const double val = tc * time_term[i] + fc * freq_term[i];
        if (val <= std::get<0>(best)) {
          std::tuple<double, int, int, double> cand{val, U, V, alpha[i]};
          if (key_less(cand, best)) best = cand;
        }
      }
    }
  }
  if (std::get<1>(best) == 0) throw infeasible_error("brute_force_pattern: no feasible (U, V) within the search caps");
  return make_pattern(std::get<3>(best), std::get<1>(best), std::get<2>(best), s);
}

}  // namespace isac_thz
