// isac-thz: ability tables, pattern design, misalignment and coverage sweeps,
// Monte-Carlo cross-checks and the scheme comparison report.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isac_thz/isac_thz.hpp"

namespace {

using namespace isac_thz;

enum Exit { ok = 0, invalid = 2, nonconvergent = 3, disagreement = 4 };

struct Common {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  long trials = 20000;
  bool strict = false;
  bool with_mc = false;
  double window = 250.0;
  double sigma_limit = 3.0;
};

Config load(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw validation_error("cannot write output file '" + c.out_path + "'");
  out << text;
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
  std::vector<Scheme> out;
  for (const auto& n : names) out.push_back(parse_scheme(n));
  if (out.empty()) throw validation_error("at least one scheme is required");
  return out;
}

void add_common(CLI::App* sub, Common& c, bool mc) {
  sub->add_option("--config", c.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out_path, "Write output here instead of stdout");
  if (!mc) return;
  sub->add_option("--seed", c.seed, "Monte-Carlo seed");
  sub->add_option("--trials", c.trials, "Monte-Carlo trials per estimate")->check(CLI::PositiveNumber);
  sub->add_option("--window-m", c.window, "Simulation disc radius in m")->check(CLI::PositiveNumber);
  sub->add_flag("--strict", c.strict, "Exit 4 when Monte Carlo disagrees with the analytic value");
  sub->add_option("--sigma-limit", c.sigma_limit, "Disagreement threshold in standard errors for --strict");
}

bool disagrees(const Common& c, const McEstimate& e, double analytic, double abs_floor = 0.0) {
  const double diff = std::abs(e.mean - analytic);
  return diff > abs_floor && diff > c.sigma_limit * e.std_error;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensing-assisted THz beam management: analysis and simulation"};
  app.require_subcommand(1);
  Common common;

  // abilities
  auto* abilities = app.add_subcommand("abilities", "Sensing-ability grid as CSV");
  add_common(abilities, common, false);

  // pattern
  auto* pattern = app.add_subcommand("pattern", "Optimal reference-signal pattern for a requirement");
  add_common(pattern, common, false);
  std::optional<double> d_max_req, v_max_req, v_max_req_kmh;
  std::optional<long> n_rs;
  bool verify = false;
  int grid = 10000;
  pattern->add_option("--d-max", d_max_req, "Required detection radius in m");
  auto* vm = pattern->add_option("--v-max", v_max_req, "Required trackable speed in m/s");
  pattern->add_option("--v-max-kmh", v_max_req_kmh, "Required trackable speed in km/h")->excludes(vm);
  pattern->add_option("--n-rs", n_rs, "Reference-signal resource elements");
  pattern->add_flag("--verify", verify, "Cross-check against exhaustive search");
  pattern->add_option("--grid", grid, "Alpha grid size for --verify")->check(CLI::Range(100, 10000000));

  // misalign
  auto* misalign = app.add_subcommand("misalign", "Beam misalignment sweep");
  add_common(misalign, common, true);
  std::string sweep_var = "n_b";
  std::vector<double> sweep_values;
  std::vector<std::string> scheme_names = {"perfect", "jsrs", "5g", "ssb"};
  misalign->add_option("--sweep", sweep_var, "Sweep variable")->check(CLI::IsMember({"n_b", "n_rs", "lambda_b"}));
  misalign->add_option("--grid", sweep_values, "Sweep values (default depends on --sweep)");
  misalign->add_option("--schemes", scheme_names, "Schemes: jsrs perfect 5g ssb");
  misalign->add_flag("--with-mc", common.with_mc, "Annotate rows with Monte-Carlo estimates");

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Coverage probability sweep");
  add_common(coverage, common, true);
  std::vector<double> r1_grid = {10, 20, 40};
  std::vector<double> threshold_db_grid = {0, 5, 10};
  std::string lower_bound = "theorem";
  std::vector<std::string> cov_scheme_names = {"perfect", "jsrs", "5g", "ssb"};
  coverage->add_option("--r1-grid", r1_grid, "Serving distances in m");
  coverage->add_option("--threshold-db-grid", threshold_db_grid, "SINR thresholds in dB");
  coverage->add_option("--schemes", cov_scheme_names, "Schemes: jsrs perfect 5g ssb");
  coverage->add_option("--lower-bound", lower_bound, "Interferer exclusion radius")
      ->check(CLI::IsMember({"theorem", "derivation"}));
  coverage->add_flag("--with-mc", common.with_mc, "Annotate rows with Monte-Carlo estimates");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimate next to its analytic value");
  add_common(simulate, common, true);
  std::string what = "timeout";
  double link_r = 52.0, sim_r1 = 20.0, sim_threshold_db = 5.0;
  std::string sim_scheme = "jsrs", coupling = "per_link", sim_lower = "theorem";
  simulate->add_option("--what", what, "Quantity")->check(CLI::IsMember({"blockage", "timeout", "misalign", "coverage"}));
  simulate->add_option("--r", link_r, "Link length in m for --what blockage");
  simulate->add_option("--r1", sim_r1, "Serving distance in m for --what coverage");
  simulate->add_option("--threshold-db", sim_threshold_db, "SINR threshold in dB for --what coverage");
  simulate->add_option("--scheme", sim_scheme, "Scheme for misalign and coverage");
  simulate->add_option("--coupling", coupling, "Blockage coupling")->check(CLI::IsMember({"per_link", "shared"}));
  simulate->add_option("--lower-bound", sim_lower, "Interferer exclusion radius")
      ->check(CLI::IsMember({"theorem", "derivation"}));

  // compare
  auto* compare = app.add_subcommand("compare", "Markdown comparison of all schemes");
  add_common(compare, common, true);
  ComparePlan plan;
  std::string cmp_lower = "theorem";
  compare->add_option("--nb-grid", plan.nb_grid, "BS beam counts");
  compare->add_option("--nrs-grid", plan.nrs_grid, "RS budgets");
  compare->add_option("--r1", plan.r1, "Serving distance in m");
  compare->add_option("--threshold-db-grid", plan.threshold_db, "SINR thresholds in dB");
  compare->add_option("--lower-bound", cmp_lower, "Interferer exclusion radius")
      ->check(CLI::IsMember({"theorem", "derivation"}));
  compare->add_flag("--with-mc", common.with_mc, "Annotate rows with Monte-Carlo estimates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return invalid;
  }

  try {
    const Config cfg = load(common);
    bool bad = false;

    if (abilities->parsed()) {
      emit(common, table2_csv(emit_table2(cfg.sys, cfg.deploy)));
    } else if (pattern->parsed()) {
      PatternRequirement req = requirement_from(cfg);
      if (d_max_req) req.d_max_req = *d_max_req;
      if (v_max_req) req.v_max_req = *v_max_req;
      if (v_max_req_kmh) req.v_max_req = kmh_to_mps(*v_max_req_kmh);
      if (n_rs) req.n_rs = *n_rs;
      SystemParams sys = cfg.sys;
      sys.n_rs = req.n_rs;
      const double theta_b = cfg.deploy.theta_b();
      const auto split = optimal_split(req, sys, theta_b);
      if (split.clamped)
        std::cerr << "warning: alpha " << split.alpha_unclamped << " clamped to " << split.alpha << "\n";
      const auto p = optimal_pattern(req, sys, theta_b);
      std::string out = "method,alpha,U,V,N_s,N_f,B_s,T_s,fits_budget,objective,delta_r_m,delta_db_m,delta_v_mps,"
                        "d_max_m,vmax_mps,vmax_kmh\n";
      auto row = [&](const char* method, const SensingPattern& q) {
        const auto a = sensing_ability(q, sys, theta_b);
        out += std::string(method) + "," + format("%.6f", q.alpha) + "," + std::to_string(q.U) + "," +
               std::to_string(q.V) + "," + std::to_string(q.N_s) + "," + std::to_string(q.N_f) + "," +
               fmt_num(q.B_s) + "," + fmt_num(q.T_s) + "," + (q.fits_budget ? "1" : "0") + "," +
               fmt_num(objective(q.alpha, q.U, q.V, sys, theta_b)) + "," + fmt_num(a.delta_r) + "," +
               fmt_num(a.delta_db) + "," + fmt_num(a.delta_v) + "," + fmt_opt(a.d_max) + "," + fmt_opt(a.v_max) +
               "," + fmt_opt(a.v_max, 3.6) + "\n";
      };
      row("closed_form", p);
      if (verify) {
        const auto b = brute_force_pattern(req, sys, theta_b, grid);
        row("brute_force", b);
        const double gap = objective(p.alpha, p.U, p.V, sys, theta_b) - objective(b.alpha, b.U, b.V, sys, theta_b);
        std::cerr << format("verify: dU=%d dV=%d dalpha=%.3g objective gap=%.3g\n", b.U - p.U, b.V - p.V,
                            b.alpha - p.alpha, gap);
      }
      emit(common, out);
    } else if (misalign->parsed()) {
      if (sweep_values.empty()) {
        if (sweep_var == "n_b") sweep_values = default_nb_grid();
        else if (sweep_var == "n_rs") sweep_values = default_nrs_grid();
        else sweep_values = {1e-3, 2e-3, 5e-3, 1e-2};
      }
      auto rows = misalign_sweep(cfg, sweep_var, sweep_values, parse_schemes(scheme_names));
      if (common.with_mc) {
        annotate_misalign_mc(rows, cfg, common.trials, common.seed);
        for (const auto& r : rows) bad = bad || disagrees(common, *r.mc, r.m.p_ms);
      }
      emit(common, misalign_csv(rows));
    } else if (coverage->parsed()) {
      const auto mode = parse_lower_bound(lower_bound);
      auto rows = coverage_rows(cfg, r1_grid, threshold_db_grid, parse_schemes(cov_scheme_names), mode);
      if (common.with_mc) {
        annotate_coverage_mc(rows, cfg, mode, common.trials, common.seed, common.window);
        for (const auto& r : rows) bad = bad || disagrees(common, *r.mc, r.result.p_cvp, 0.02);
      }
      emit(common, coverage_csv(rows));
    } else if (simulate->parsed()) {
      const auto cpl = parse_coupling(coupling);
      McEstimate e;
      double analytic = 0.0;
      std::string extra = what + "|" + coupling;
      if (what == "blockage") {
        e = estimate_blockage(cfg.deploy, link_r, common.trials, common.seed, cpl);
        analytic = blockage_probability(cfg.deploy, link_r);
        extra += "|" + fmt_num(link_r);
      } else if (what == "timeout") {
        e = estimate_timeout(cfg.deploy, common.trials, common.seed, cpl);
        analytic = timeout_probability(cfg.deploy);
      } else if (what == "misalign") {
        const auto s = parse_scheme(sim_scheme);
        const auto a = scheme_ability(s, cfg);
        e = estimate_misalignment(cfg.deploy, a, cfg.sys.tau, common.trials, common.seed, cpl);
        analytic = beam_misalignment(cfg.deploy, a, cfg.sys.tau).p_ms;
        extra += "|" + sim_scheme;
      } else {
        const auto s = parse_scheme(sim_scheme);
        const auto mode = parse_lower_bound(sim_lower);
        const auto budget = make_link_budget(cfg.sys, cfg.deploy);
        const auto a = scheme_ability(s, cfg);
        CoverageQuery q;
        q.r1 = sim_r1;
        q.threshold = db_to_linear(sim_threshold_db);
        q.scheme = s;
        q.lower_bound_mode = mode;
        const auto res = coverage_probability(q, budget, cfg.deploy, cfg.sys, a);
        McOptions opt;
        opt.window_radius = common.window;
        opt.coupling = cpl;
        opt.lower_bound_mode = mode;
        e = estimate_coverage_given(cfg.deploy, budget, cfg.sys, res.p_ms, sim_r1, q.threshold, common.trials,
                                    common.seed, opt);
        analytic = res.p_cvp;
        extra += "|" + sim_scheme + "|" + sim_lower + "|" + fmt_num(sim_r1) + "|" + fmt_num(sim_threshold_db) + "|" +
                 fmt_num(common.window);
      }
      extra += "|" + std::to_string(common.seed) + "|" + std::to_string(common.trials);
      bad = disagrees(common, e, analytic, what == "coverage" ? 0.02 : 0.0);
      emit(common, "quantity,params_hash,mean,std_error,trials,analytic_value,sigmas_off\n" + what + "," +
                       params_hash(cfg, extra) + "," + fmt_prob(e.mean) + "," + fmt_prob(e.std_error) + "," +
                       std::to_string(e.trials) + "," + fmt_prob(analytic) + "," +
                       format("%.3f", sigmas_off(e, analytic)) + "\n");
    } else if (compare->parsed()) {
      plan.mode = parse_lower_bound(cmp_lower);
      plan.with_mc = common.with_mc;
      plan.trials = common.trials;
      plan.seed = common.seed;
      plan.window = common.window;
      const auto rep = run_compare(cfg, plan);
      bad = plan.with_mc && rep.summary.max_abs_sigmas > common.sigma_limit;
      emit(common, rep.markdown);
    }

    if (bad && common.strict) {
      std::cerr << "error: Monte-Carlo estimate disagrees with the analytic value\n";
      return disagreement;
    }
    return ok;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nonconvergent;
  } catch (const isac_thz::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  }
}
