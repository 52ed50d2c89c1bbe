// Picks the sensing pattern for a range and speed requirement, then shows
// how much misalignment it removes compared with fixed 5G resolutions.

#include <cstdio>

#include "isac_thz/isac_thz.hpp"

int main() {
  using namespace isac_thz;
  Config cfg;
  const PatternRequirement req{78.1, kmh_to_mps(70.0), cfg.sys.n_rs};
  const auto p = optimal_pattern(req, cfg.sys, cfg.deploy.theta_b());
  const auto a = sensing_ability(p, cfg.sys, cfg.deploy.theta_b());
  std::printf("alpha=%.4f U=%d V=%d  N_s=%ld N_f=%ld\n", p.alpha, p.U, p.V, p.N_s, p.N_f);
  std::printf("delta_db=%.4f m  delta_v=%.4f m/s\n", a.delta_db, a.delta_v);

  const auto jsrs = beam_misalignment(cfg.deploy, a, cfg.sys.tau);
  const auto base = beam_misalignment(cfg.deploy, baseline_5g_ability(), cfg.sys.tau);
  std::printf("p_ms: jsrs %.4f  5g %.4f  (timeout share %.4f)\n", jsrs.p_ms, base.p_ms, jsrs.p_to);
}
