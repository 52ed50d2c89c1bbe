#pragma once
// Sweeps and text emission shared by the command-line tool: ability grid,
// misalignment and coverage sweeps, Monte-Carlo annotation and the scheme comparison.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "coverage.hpp"
#include "mcsim.hpp"
#include "misalignment.hpp"
#include "pattern.hpp"
#include "sensing.hpp"

namespace isac_thz {

// printf-style formatting into a std::string.
template <class... Args>
std::string format(const char* fmt, Args... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string s(static_cast<std::size_t>(n), '\0');
  std::snprintf(s.data(), s.size() + 1, fmt, args...);
  return s;
}

inline std::string fmt_prob(double p) { return format("%.6g", p); }
inline std::string fmt_num(double v) { return format("%.10g", v); }
inline std::string fmt_opt(const std::optional<double>& v, double scale = 1.0) {
  return v ? fmt_num(*v * scale) : std::string();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string params_hash(const Config& c, const std::string& extra) {
  return format("%016llx", static_cast<unsigned long long>(fnv1a(write_config(c) + "|" + extra)));
}

// ---------------------------------------------------------------- abilities

struct AbilityRow {
  std::string signal;     // "ssb" or "rs"
  int U = 1;
  std::optional<int> V;   // empty for the SSB row
  double B_s = 0.0;
  double T_s = 0.0;
  double f_c = 0.0;
  SensingAbility ability;
};

// The reference ability grid: the SSB row, range rows over (U, B_s) at the
// configured carrier, and velocity rows over (f_c, V, T_s) at U = 2.
inline std::vector<AbilityRow> emit_table2(const SystemParams& sys, const Deployment& deploy) {
  const double theta_b = deploy.theta_b();
  std::vector<AbilityRow> rows;
  AbilityRow ssb;
  ssb.signal = "ssb";
  ssb.B_s = sys.b_ssb;
  ssb.T_s = sys.t_ssb;
  ssb.f_c = sys.f_c;
  ssb.ability = ssb_ability(sys, theta_b);
  rows.push_back(ssb);
  for (int U : {2, 3})
    for (double B : {0.1e9, 0.2e9}) {
      AbilityRow r;
      r.signal = "rs";
      r.U = U;
      r.V = 1;
      r.B_s = B;
      r.T_s = 0.5e-3;
      r.f_c = sys.f_c;
      r.ability = sensing_ability(U, 1, B, r.T_s, r.f_c, sys, theta_b);
      rows.push_back(r);
    }
  for (double f : {0.22e12, 1e12})
    for (int V : {1, 3})
      for (double T : {0.5e-3, 1e-3}) {
        AbilityRow r;
        r.signal = "rs";
        r.U = 2;
        r.V = V;
        r.B_s = 0.1e9;
        r.T_s = T;
        r.f_c = f;
        r.ability = sensing_ability(2, V, r.B_s, T, f, sys, theta_b);
        rows.push_back(r);
      }
  return rows;
}

inline std::string table2_csv(const std::vector<AbilityRow>& rows) {
  std::string out = "signal,U,V,B_s,T_s,f_c,d_max_m,delta_db_m,delta_v_mps,vmax_kmh\n";
  for (const auto& r : rows) {
    out += r.signal + "," + std::to_string(r.U) + "," + (r.V ? std::to_string(*r.V) : std::string()) + "," +
           fmt_num(r.B_s) + "," + fmt_num(r.T_s) + "," + fmt_num(r.f_c) + "," + fmt_opt(r.ability.d_max) + "," +
           fmt_num(r.ability.delta_db) + "," + fmt_num(r.ability.delta_v) + "," +
           fmt_opt(r.ability.v_max, 3.6) + "\n";
  }
  return out;
}

// ------------------------------------------------------------- misalignment

struct MisalignRow {
  std::string sweep_var;
  double value = 0.0;
  Scheme scheme = Scheme::jsrs;
  MisalignmentBreakdown m;
  std::optional<McEstimate> mc;
};

inline const std::vector<double>& default_nb_grid() {
  static const std::vector<double> g = {32, 64, 128, 256, 512};
  return g;
}
inline const std::vector<double>& default_nrs_grid() {
  static const std::vector<double> g = {1000, 1500, 2000, 5000, 10000, 20000, 50000, 100000};
  return g;
}

// Applies one sweep coordinate to a copy of the configuration.
inline Config with_sweep_value(Config c, const std::string& var, double value) {
  if (var == "n_b") {
    c.deploy.n_b = static_cast<int>(value);
  } else if (var == "n_rs") {
    c.sys.n_rs = static_cast<long>(value);
  } else if (var == "lambda_b") {
    c.deploy.lambda_b = value;
  } else {
    throw validation_error("unknown sweep variable '" + var + "' (expected n_b, n_rs or lambda_b)");
  }
  c.validate();
  return c;
}

inline std::vector<MisalignRow> misalign_sweep(const Config& base, const std::string& var,
                                               const std::vector<double>& values, const std::vector<Scheme>& schemes) {
  if (values.empty() || schemes.empty()) throw validation_error("misalign sweep: grids must be non-empty");
  std::vector<MisalignRow> rows;
  for (double v : values) {
    const Config c = with_sweep_value(base, var, v);
    for (Scheme s : schemes) rows.push_back({var, v, s, scheme_misalignment(s, c), std::nullopt});
  }
  return rows;
}

inline void annotate_misalign_mc(std::vector<MisalignRow>& rows, const Config& base, long trials, std::uint64_t seed) {
  for (auto& r : rows) {
    const Config c = with_sweep_value(base, r.sweep_var, r.value);
    r.mc = estimate_misalignment(c.deploy, scheme_ability(r.scheme, c), c.sys.tau, trials, seed);
  }
}

inline std::string misalign_csv(const std::vector<MisalignRow>& rows) {
  const bool mc = !rows.empty() && rows.front().mc.has_value();
  std::string out = "sweep_var,value,scheme,p_err,p_to,p_ms";
  out += mc ? ",mc_mean,mc_std_error,sigmas_off\n" : "\n";
  for (const auto& r : rows) {
    out += r.sweep_var + "," + fmt_num(r.value) + "," + scheme_name(r.scheme) + "," + fmt_prob(r.m.p_err) + "," +
           fmt_prob(r.m.p_to) + "," + fmt_prob(r.m.p_ms);
    if (mc) out += "," + fmt_prob(r.mc->mean) + "," + fmt_prob(r.mc->std_error) + "," + format("%.3f", sigmas_off(*r.mc, r.m.p_ms));
    out += "\n";
  }
  return out;
}

// ----------------------------------------------------------------- coverage

struct CoverageRow {
  CoverageResult result;
  std::optional<McEstimate> mc;
};

inline std::vector<CoverageRow> coverage_rows(const Config& c, const std::vector<double>& r1_grid,
                                              const std::vector<double>& threshold_db_grid,
                                              const std::vector<Scheme>& schemes, LowerBoundMode mode) {
  std::vector<double> thresholds;
  for (double db : threshold_db_grid) thresholds.push_back(db_to_linear(db));
  std::vector<CoverageRow> rows;
  for (auto& r : coverage_sweep(c, r1_grid, thresholds, schemes, mode)) rows.push_back({r, std::nullopt});
  return rows;
}

inline void annotate_coverage_mc(std::vector<CoverageRow>& rows, const Config& c, LowerBoundMode mode, long trials,
                                 std::uint64_t seed, double window) {
  const auto budget = make_link_budget(c.sys, c.deploy);
  McOptions opt;
  opt.lower_bound_mode = mode;
  opt.window_radius = window;
  for (auto& r : rows)
    r.mc = estimate_coverage_given(c.deploy, budget, c.sys, r.result.p_ms, r.result.r1, r.result.threshold, trials,
                                   seed, opt);
}

inline std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  const bool mc = !rows.empty() && rows.front().mc.has_value();
  std::string out = "scheme,r1_m,threshold_db,p_ms,p_cm,p_cvp,abs_err";
  out += mc ? ",mc_mean,mc_std_error,sigmas_off\n" : "\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out += std::string(scheme_name(r.scheme)) + "," + fmt_num(r.r1) + "," + format("%.6g", linear_to_db(r.threshold)) +
           "," + fmt_prob(r.p_ms) + "," + fmt_prob(r.p_cm) + "," + fmt_prob(r.p_cvp) + "," +
           format("%.3g", r.integral_abs_error);
    if (mc) out += "," + fmt_prob(row.mc->mean) + "," + fmt_prob(row.mc->std_error) + "," + format("%.3f", sigmas_off(*row.mc, r.p_cvp));
    out += "\n";
  }
  return out;
}

// ------------------------------------------------------------------ compare

struct ComparePlan {
  std::vector<double> nb_grid = default_nb_grid();
  std::vector<double> nrs_grid = default_nrs_grid();
  double r1 = 20.0;
  std::vector<double> threshold_db = {0.0, 5.0, 10.0};
  LowerBoundMode mode = LowerBoundMode::theorem;
  bool with_mc = false;
  long trials = 20000;
  std::uint64_t seed = 1;
  double window = 250.0;
};

struct CompareSummary {
  double reduction_vs_5g = 0.0;   // mean relative p_ms reduction over the n_b sweep
  double reduction_vs_ssb = 0.0;
  double max_gap_vs_perfect = 0.0;  // max p_cvp(perfect) - p_cvp(jsrs) over the N_RS >= 1500 points
  double mean_gap_vs_perfect = 0.0;
  double max_abs_sigmas = 0.0;      // over MC-annotated rows, when requested
  bool ordering_holds = true;
};

struct CompareReport {
  std::string markdown;
  CompareSummary summary;
  std::vector<MisalignRow> misalign;
  std::vector<std::pair<std::string, std::vector<CoverageRow>>> coverage;  // per sweep point label
};

inline double relative_reduction(double baseline, double value) {
  return baseline > 0.0 ? (baseline - value) / baseline : 0.0;
}

inline CompareReport run_compare(const Config& base, const ComparePlan& plan) {
  const std::vector<Scheme> all = {Scheme::perfect, Scheme::jsrs, Scheme::fiveg, Scheme::ssb};
  CompareReport rep;
  auto& sum = rep.summary;
  std::ostringstream md;
  md << "# Scheme comparison\n\n";
  md << "Serving distance " << fmt_num(plan.r1) << " m, lower bound `" << lower_bound_name(plan.mode) << "`.\n\n";

  auto nb_rows = misalign_sweep(base, "n_b", plan.nb_grid, all);
  auto nrs_rows = misalign_sweep(base, "n_rs", plan.nrs_grid, all);
  if (plan.with_mc) {
    annotate_misalign_mc(nb_rows, base, plan.trials, plan.seed);
    annotate_misalign_mc(nrs_rows, base, plan.trials, plan.seed);
  }

  auto find = [](const std::vector<MisalignRow>& rows, double v, Scheme s) -> const MisalignRow& {
    for (const auto& r : rows)
      if (r.value == v && r.scheme == s) return r;
    throw std::logic_error("compare: missing row");
  };
  auto misalign_table = [&](const std::vector<MisalignRow>& rows, const std::vector<double>& grid, const char* var) {
    md << "| " << var << " | perfect | jsrs | 5g | ssb |\n|---|---|---|---|---|\n";
    for (double v : grid) {
      md << "| " << fmt_num(v);
      for (Scheme s : all) {
        const auto& r = find(rows, v, s);
        md << " | " << fmt_prob(r.m.p_ms);
        if (r.mc) {
          const double z = sigmas_off(*r.mc, r.m.p_ms);
          sum.max_abs_sigmas = std::max(sum.max_abs_sigmas, std::abs(z));
          md << format(" (MC %+.2f sigma)", z);
        }
      }
      md << " |\n";
    }
    md << "\n";
  };

  md << "## Beam misalignment probability\n\n### Over BS beam count\n\n";
  misalign_table(nb_rows, plan.nb_grid, "n_b");
  md << "### Over RS budget\n\n";
  misalign_table(nrs_rows, plan.nrs_grid, "N_RS");

  double r5 = 0.0, rs = 0.0;
  for (double v : plan.nb_grid) {
    const double j = find(nb_rows, v, Scheme::jsrs).m.p_ms;
    r5 += relative_reduction(find(nb_rows, v, Scheme::fiveg).m.p_ms, j);
    rs += relative_reduction(find(nb_rows, v, Scheme::ssb).m.p_ms, j);
  }
  sum.reduction_vs_5g = r5 / plan.nb_grid.size();
  sum.reduction_vs_ssb = rs / plan.nb_grid.size();
  for (const auto* rows : {&nb_rows, &nrs_rows})
    for (const auto& r : *rows) {
      if (r.scheme != Scheme::jsrs) continue;
      const auto& grid = rows == &nb_rows ? nb_rows : nrs_rows;
      const double p = find(grid, r.value, Scheme::perfect).m.p_ms;
      const double f = find(grid, r.value, Scheme::fiveg).m.p_ms;
      if (!(p <= r.m.p_ms && r.m.p_ms <= f)) sum.ordering_holds = false;
    }

  md << format("Average relative reduction of JSRS over the n_b sweep: %.1f%% vs 5G, %.1f%% vs SSB.\n\n",
               100.0 * sum.reduction_vs_5g, 100.0 * sum.reduction_vs_ssb);

  // Coverage at each sweep point for perfect, jsrs and 5g.
  const std::vector<Scheme> cov_schemes = {Scheme::perfect, Scheme::jsrs, Scheme::fiveg};
  md << "## Coverage probability\n\n";
  md << "| sweep | threshold (dB) | perfect | jsrs | 5g |\n|---|---|---|---|---|\n";
  double gap_sum = 0.0;
  int gap_count = 0;
  auto coverage_block = [&](const std::string& var, double v) {
    const Config c = with_sweep_value(base, var, v);
    auto rows = coverage_rows(c, {plan.r1}, plan.threshold_db, cov_schemes, plan.mode);
    if (plan.with_mc) annotate_coverage_mc(rows, c, plan.mode, plan.trials, plan.seed, plan.window);
    const std::size_t nt = plan.threshold_db.size();
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& p = rows[0 * nt + t];
      const auto& j = rows[1 * nt + t];
      const auto& f = rows[2 * nt + t];
      if (!(p.result.p_cvp >= j.result.p_cvp && j.result.p_cvp >= f.result.p_cvp)) sum.ordering_holds = false;
      if (var == "n_rs" && v >= 1500) {
        const double gap = p.result.p_cvp - j.result.p_cvp;
        sum.max_gap_vs_perfect = std::max(sum.max_gap_vs_perfect, gap);
        gap_sum += gap;
        ++gap_count;
      }
      md << "| " << var << "=" << fmt_num(v) << " | " << format("%g", plan.threshold_db[t]);
      for (const auto* row : {&p, &j, &f}) {
        md << " | " << fmt_prob(row->result.p_cvp);
        if (row->mc) {
          const double z = sigmas_off(*row->mc, row->result.p_cvp);
          sum.max_abs_sigmas = std::max(sum.max_abs_sigmas, std::abs(z));
          md << format(" (MC %+.2f sigma)", z);
        }
      }
      md << " |\n";
    }
    rep.coverage.emplace_back(var + "=" + fmt_num(v), std::move(rows));
  };
  for (double v : plan.nb_grid) coverage_block("n_b", v);
  for (double v : plan.nrs_grid) coverage_block("n_rs", v);
  if (gap_count) sum.mean_gap_vs_perfect = gap_sum / gap_count;
  md << "\n";
  md << format("JSRS vs perfect coverage gap for N_RS >= 1500: max %.4f, mean %.4f.\n\n", sum.max_gap_vs_perfect,
               sum.mean_gap_vs_perfect);
  md << "Ordering perfect >= jsrs >= 5g at every point: " << (sum.ordering_holds ? "yes" : "no") << ".\n";
  if (plan.with_mc) md << format("Largest |sigmas_off| against Monte Carlo: %.2f.\n", sum.max_abs_sigmas);

  rep.misalign = std::move(nb_rows);
  rep.misalign.insert(rep.misalign.end(), nrs_rows.begin(), nrs_rows.end());
  rep.markdown = md.str();
  return rep;
}

}  // namespace isac_thz
