#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "isac_thz/report.hpp"

using namespace isac_thz;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Reference values are printed rounded; accept 1% or half a unit in the last printed digit.
void expect_printed(double got, double printed, double unit, const std::string& what) {
  const double tol = std::max(0.01 * printed, 0.5 * unit);
  EXPECT_NEAR(got, printed, tol) << what;
}

}  // namespace

TEST(AbilityTable, ReproducesReferenceCells) {
  const Config c;
  const auto rows = emit_table2(c.sys, c.deploy);
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0].signal, "ssb");
  expect_printed(*rows[0].ability.d_max, 78.1, 0.1, "ssb range");
  expect_printed(rows[0].ability.delta_db, 0.039, 0.001, "ssb range resolution");

  const double range[] = {39.1, 39.1, 26.1, 26.1};
  const double range_res[] = {0.090, 0.045, 0.060, 0.030};
  for (int i = 0; i < 4; ++i) {
    expect_printed(*rows[1 + i].ability.d_max, range[i], 0.1, "range row " + std::to_string(i));
    expect_printed(rows[1 + i].ability.delta_db, range_res[i], 0.001, "range resolution row " + std::to_string(i));
  }

  const double vel_res[] = {1.36, 0.68, 0.45, 0.23, 0.30, 0.15, 0.10, 0.05};
  const double vmax_kmh[] = {550.3, 550.3, 183.5, 183.5, 121.1, 121.1, 40.36, 40.36};
  const double vmax_unit[] = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.01, 0.01};
  for (int i = 0; i < 8; ++i) {
    const auto& r = rows[5 + i];
    expect_printed(r.ability.delta_v, vel_res[i], 0.01, "velocity resolution row " + std::to_string(i));
    expect_printed(*r.ability.v_max * 3.6, vmax_kmh[i], vmax_unit[i], "top speed row " + std::to_string(i));
  }
}

TEST(AbilityTable, CsvIsDeterministicAndWellFormed) {
  const Config c;
  const auto a = table2_csv(emit_table2(c.sys, c.deploy));
  const auto b = table2_csv(emit_table2(c.sys, c.deploy));
  EXPECT_EQ(a, b);
  const auto rows = parse_csv(a);
  ASSERT_EQ(rows.size(), 14u);
  EXPECT_EQ(rows[0].size(), 10u);
  EXPECT_EQ(rows[0][0], "signal");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), 10u) << "line " << i;
  // The SSB row has no time spacing and no velocity limit.
  EXPECT_EQ(rows[1][0], "ssb");
  EXPECT_TRUE(rows[1][2].empty());
  EXPECT_TRUE(rows[1][9].empty());
  EXPECT_NEAR(std::stod(rows[2][6]), 39.1, 0.1);
}

TEST(Formatting, NumbersAndOptionals) {
  EXPECT_EQ(fmt_prob(0.123456789), "0.123457");
  EXPECT_EQ(fmt_num(1500.0), "1500");
  EXPECT_EQ(fmt_opt(std::nullopt), "");
  EXPECT_EQ(fmt_opt(10.0, 3.6), "36");
}

TEST(ParamsHash, StableAndSensitive) {
  Config c;
  const auto h = params_hash(c, "seed=1");
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, params_hash(c, "seed=1"));
  EXPECT_NE(h, params_hash(c, "seed=2"));
  c.deploy.n_b = 256;
  EXPECT_NE(h, params_hash(c, "seed=1"));
}

TEST(Sweep, AppliesAndValidates) {
  const Config base;
  EXPECT_EQ(with_sweep_value(base, "n_b", 256).deploy.n_b, 256);
  EXPECT_EQ(with_sweep_value(base, "n_rs", 1500).sys.n_rs, 1500);
  EXPECT_DOUBLE_EQ(with_sweep_value(base, "lambda_b", 0.004).deploy.lambda_b, 0.004);
  EXPECT_THROW(with_sweep_value(base, "f_c", 1e12), validation_error);
  EXPECT_THROW(with_sweep_value(base, "n_b", 0), validation_error);
}

TEST(MisalignCsv, RowsMatchDirectEvaluation) {
  const Config base;
  const std::vector<Scheme> schemes = {Scheme::perfect, Scheme::jsrs, Scheme::fiveg, Scheme::ssb};
  const auto rows = misalign_sweep(base, "n_b", default_nb_grid(), schemes);
  const auto csv = parse_csv(misalign_csv(rows));
  ASSERT_EQ(csv.size(), 1 + default_nb_grid().size() * schemes.size());
  EXPECT_EQ(csv[0].size(), 6u);
  for (std::size_t i = 1; i < csv.size(); ++i) {
    const Config c = with_sweep_value(base, "n_b", std::stod(csv[i][1]));
    const double p = scheme_misalignment(parse_scheme(csv[i][2]), c).p_ms;
    // Six significant digits: off by at most half a unit in the sixth.
    const double half_unit = 0.5 * std::pow(10.0, std::floor(std::log10(p)) - 5.0);
    EXPECT_NEAR(std::stod(csv[i][5]), p, half_unit * (1.0 + 1e-9)) << "line " << i;
  }
}

TEST(MisalignCsv, MonteCarloColumnsAppearWhenAnnotated) {
  const Config base;
  auto rows = misalign_sweep(base, "n_rs", {1500}, {Scheme::jsrs});
  annotate_misalign_mc(rows, base, 2000, 3);
  const auto csv = parse_csv(misalign_csv(rows));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].size(), 9u);
  EXPECT_EQ(csv[0][6], "mc_mean");
  EXPECT_EQ(csv[1].size(), 9u);
}

TEST(Compare, IdenticalSchemesGiveNoReduction) {
  EXPECT_DOUBLE_EQ(relative_reduction(0.3, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(relative_reduction(0.4, 0.1), 0.75);
  EXPECT_DOUBLE_EQ(relative_reduction(0.0, 0.0), 0.0);
}

TEST(Compare, SummaryRecomputesFromEmittedRows) {
  ComparePlan plan;
  plan.nb_grid = {64, 256};
  plan.nrs_grid = {1500};
  plan.threshold_db = {5.0};
  const auto rep = run_compare(Config{}, plan);

  // Average reduction from the CSV text alone.
  const auto csv = parse_csv(misalign_csv(rep.misalign));
  double sum = 0.0;
  for (double nb : plan.nb_grid) {
    double j = -1.0, f = -1.0;
    for (std::size_t i = 1; i < csv.size(); ++i) {
      if (csv[i][0] != "n_b" || std::stod(csv[i][1]) != nb) continue;
      if (csv[i][2] == "jsrs") j = std::stod(csv[i][5]);
      if (csv[i][2] == "5g") f = std::stod(csv[i][5]);
    }
    ASSERT_GE(j, 0.0);
    ASSERT_GT(f, 0.0);
    sum += (f - j) / f;
  }
  EXPECT_NEAR(rep.summary.reduction_vs_5g, sum / plan.nb_grid.size(), 1e-5);

  ASSERT_EQ(rep.coverage.size(), 3u);
  const auto& last = rep.coverage.back().second;
  ASSERT_EQ(last.size(), 3u);
  EXPECT_NEAR(rep.summary.max_gap_vs_perfect, last[0].result.p_cvp - last[1].result.p_cvp, 1e-15);
  EXPECT_NE(rep.markdown.find("| n_b | perfect | jsrs | 5g | ssb |"), std::string::npos);
  EXPECT_NE(rep.markdown.find("Average relative reduction"), std::string::npos);
}
