// One coverage probability with its Monte-Carlo cross-check.

#include <cstdio>

#include "isac_thz/isac_thz.hpp"

int main() {
  using namespace isac_thz;
  Config cfg;
  const auto budget = make_link_budget(cfg.sys, cfg.deploy);
  CoverageQuery q;
  q.r1 = 20.0;
  q.threshold = db_to_linear(5.0);
  const auto res = coverage_probability(q, budget, cfg.deploy, cfg.sys, scheme_ability(Scheme::jsrs, cfg));
  const auto mc = estimate_coverage_given(cfg.deploy, budget, cfg.sys, res.p_ms, q.r1, q.threshold, 20000, 7);
  std::printf("p_cvp = %.5f (p_ms %.4f, p_cm %.6f)\n", res.p_cvp, res.p_ms, res.p_cm);
  std::printf("Monte Carlo %.5f +- %.5f over %ld trials\n", mc.mean, mc.std_error, mc.trials);
}
