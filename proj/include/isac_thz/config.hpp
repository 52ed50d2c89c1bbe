#pragma once
// Parameter sets, the key = value config format and the absorption-coefficient table.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace isac_thz {

struct SystemParams {
  double f_c = 0.34e12;          // Hz
  double f_scs = 1.92e6;         // Hz
  double t_sym = 4.46e-6;        // s
  double tau = 20e-3;            // s, SSB period
  double b_ssb = 240 * 1.92e6;   // Hz
  double t_ssb = 17.84e-6;       // s
  long n_rs = 5000;
  double b_tot = 1e9;            // Hz
  double t_tot = 20e-3;          // s
  double p_t = dbm_to_watt(23.0);                      // W
  double thermal_noise_density = dbm_to_watt(-174.0);  // W/Hz
  double k = 2e-3;               // 1/m, absorption at f_c

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw validation_error(std::string("system: ") + name + " must be > 0");
    };
    positive(f_c, "f_c");
    positive(f_scs, "f_scs");
    positive(t_sym, "t_sym");
    positive(tau, "tau");
    positive(b_ssb, "b_ssb");
    positive(t_ssb, "t_ssb");
    positive(b_tot, "b_tot");
    positive(t_tot, "t_tot");
    positive(p_t, "p_t");
    positive(thermal_noise_density, "thermal_noise_density");
    if (!(k >= 0.0) || !std::isfinite(k)) throw validation_error("system: k must be >= 0");
    if (n_rs < 1) throw validation_error("system: n_rs must be >= 1");
    if (b_ssb > b_tot) throw validation_error("system: b_ssb must not exceed b_tot");
    if (t_ssb > tau) throw validation_error("system: t_ssb must not exceed tau");
  }

  double thermal_noise() const { return thermal_noise_density * b_tot; }
  bool operator==(const SystemParams&) const = default;
};

struct Deployment {
  double lambda_b = 2e-3;   // BSs per m^2
  double lambda_m = 5e-3;   // MTs per m^2
  double lambda_s = 1.5e-2; // blockers per m^2
  double r_b = 0.5;         // node radius, m
  int n_b = 128;
  int n_m = 128;
  double v = kmh_to_mps(70.0);  // MT speed, m/s

  double theta_b() const { return two_pi / n_b; }
  double theta_m() const { return two_pi / n_m; }
  // Density of everything that can block a link.
  double lambda_all() const { return lambda_b + lambda_m + lambda_s; }
  // Density of blockers of the serving link in the misalignment analysis.
  double lambda_obstacles() const { return lambda_s + lambda_m; }

  void validate() const {
    auto density = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw validation_error(std::string("deployment: ") + name + " must be >= 0");
    };
    density(lambda_b, "lambda_b");
    density(lambda_m, "lambda_m");
    density(lambda_s, "lambda_s");
    if (!(r_b > 0.0)) throw validation_error("deployment: r_b must be > 0");
    if (n_b < 4) throw validation_error("deployment: n_b must be >= 4 (theta_b < pi/2)");
    if (n_m < 4) throw validation_error("deployment: n_m must be >= 4 (theta_m < pi/2)");
    if (!(v >= 0.0) || !std::isfinite(v)) throw validation_error("deployment: v must be >= 0");
  }
  bool operator==(const Deployment&) const = default;
};

struct AbsorptionTable {
  struct Row {
    double frequency;
    double k;
  };
  std::vector<Row> rows;

  void validate() const {
    if (rows.empty()) throw validation_error("absorption table: no rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!(rows[i].k >= 0.0)) throw validation_error("absorption table: K must be >= 0");
      if (i > 0 && !(rows[i].frequency > rows[i - 1].frequency))
        throw validation_error("absorption table: frequencies must be strictly increasing");
    }
  }
};

// Linear interpolation, no extrapolation.
inline double absorption_at(const AbsorptionTable& table, double f) {
  table.validate();
  const auto& rows = table.rows;
  if (f < rows.front().frequency || f > rows.back().frequency)
    throw domain_error("absorption_at: frequency outside table range");
  auto hi = std::lower_bound(rows.begin(), rows.end(), f,
                             [](const AbsorptionTable::Row& r, double x) { return r.frequency < x; });
  if (hi->frequency == f) return hi->k;
  auto lo = hi - 1;
  const double t = (f - lo->frequency) / (hi->frequency - lo->frequency);
  return lo->k + t * (hi->k - lo->k);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view text, const std::string& where) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw parse_error(where + ": not a number: '" + std::string(text) + "'");
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline AbsorptionTable parse_absorption_csv(std::string_view text) {
  AbsorptionTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != "frequency_hz,k_per_m")
        throw parse_error("absorption csv: expected header 'frequency_hz,k_per_m'");
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string_view::npos)
      throw parse_error("absorption csv line " + std::to_string(lineno) + ": expected two columns");
    const std::string where = "absorption csv line " + std::to_string(lineno);
    table.rows.push_back({detail::parse_number(t.substr(0, comma), where),
                          detail::parse_number(t.substr(comma + 1), where)});
  }
  if (!header) throw parse_error("absorption csv: missing header");
  table.validate();
  return table;
}

inline AbsorptionTable load_absorption_csv(const std::filesystem::path& path) {
  return parse_absorption_csv(detail::read_file(path));
}

struct Config {
  SystemParams sys;
  Deployment deploy;
  double d_max_req = 78.1;             // m
  double v_max_req = kmh_to_mps(70.0); // m/s

  void validate() const {
    sys.validate();
    deploy.validate();
    if (!(d_max_req > 0.0)) throw validation_error("pattern: d_max_req must be > 0");
    if (!(v_max_req > 0.0)) throw validation_error("pattern: v_max_req must be > 0");
  }
  bool operator==(const Config&) const = default;
};

// Parses key = value lines. `base_dir` resolves a relative absorption_table path.
inline Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  Config c;
  static const std::vector<std::string> sections = {"system", "deployment", "pattern"};
  std::map<std::string, std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = line;
    if (auto hash = t.find_first_of("#;"); hash != std::string_view::npos) t = t.substr(0, hash);
    t = detail::trim(t);
    if (t.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw parse_error(where + ": unterminated section header");
      const std::string name(detail::trim(t.substr(1, t.size() - 2)));
      if (std::find(sections.begin(), sections.end(), name) == sections.end())
        throw parse_error(where + ": unknown section [" + name + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw parse_error(where + ": expected key = value");
    const std::string key(detail::trim(t.substr(0, eq)));
    const std::string value(detail::trim(t.substr(eq + 1)));
    if (seen.count(key)) throw parse_error(where + ": duplicate key '" + key + "'");
    seen[key] = value;
  }

  auto take = [&](const std::string& key, auto&& apply) {
    auto it = seen.find(key);
    if (it == seen.end()) return false;
    apply(it->second, "config key '" + key + "'");
    seen.erase(it);
    return true;
  };
  auto num = [&](const std::string& key, double& dst, double scale = 1.0) {
    return take(key, [&](const std::string& v, const std::string& w) {
      dst = detail::parse_number(v, w) * scale;
    });
  };
  auto integer = [&](const std::string& key, auto& dst) {
    take(key, [&](const std::string& v, const std::string& w) {
      const double x = detail::parse_number(v, w);
      if (x != std::floor(x) || std::abs(x) > 1e15) throw parse_error(w + ": expected an integer");
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
    });
  };
  auto exclusive = [&](const std::string& a, const std::string& b) {
    if (seen.count(a) && seen.count(b))
      throw parse_error("config keys '" + a + "' and '" + b + "' are mutually exclusive");
  };

  exclusive("p_t", "p_t_dbm");
  exclusive("thermal_noise_density", "thermal_noise_density_dbm");
  exclusive("k", "absorption_table");
  exclusive("v", "v_kmh");
  exclusive("v_max_req", "v_max_req_kmh");

  auto& s = c.sys;
  num("f_c", s.f_c);
  num("f_scs", s.f_scs);
  num("t_sym", s.t_sym);
  num("tau", s.tau);
  if (!num("b_ssb", s.b_ssb)) s.b_ssb = 240.0 * s.f_scs;
  num("t_ssb", s.t_ssb);
  integer("n_rs", s.n_rs);
  num("b_tot", s.b_tot);
  num("t_tot", s.t_tot);
  num("p_t", s.p_t);
  take("p_t_dbm", [&](const std::string& v, const std::string& w) {
    s.p_t = dbm_to_watt(detail::parse_number(v, w));
  });
  num("thermal_noise_density", s.thermal_noise_density);
  take("thermal_noise_density_dbm", [&](const std::string& v, const std::string& w) {
    s.thermal_noise_density = dbm_to_watt(detail::parse_number(v, w));
  });
  num("k", s.k);
  take("absorption_table", [&](const std::string& v, const std::string&) {
    std::filesystem::path p = v;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    s.k = absorption_at(load_absorption_csv(p), s.f_c);
  });

  auto& d = c.deploy;
  num("lambda_b", d.lambda_b);
  num("lambda_m", d.lambda_m);
  num("lambda_s", d.lambda_s);
  num("r_b", d.r_b);
  integer("n_b", d.n_b);
  integer("n_m", d.n_m);
  num("v", d.v);
  take("v_kmh", [&](const std::string& v, const std::string& w) {
    d.v = kmh_to_mps(detail::parse_number(v, w));
  });

  num("d_max_req", c.d_max_req);
  num("v_max_req", c.v_max_req);
  take("v_max_req_kmh", [&](const std::string& v, const std::string& w) {
    c.v_max_req = kmh_to_mps(detail::parse_number(v, w));
  });

  if (!seen.empty()) throw parse_error("unknown config key '" + seen.begin()->first + "'");
  c.validate();
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path), path.parent_path());
}

// Serializes every parameter in SI units with round-trip precision.
inline std::string write_config(const Config& c) {
  std::string out;
  auto line = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += key;
    out += " = ";
    out += buf;
    out += '\n';
  };
  const auto& s = c.sys;
  out += "[system]\n";
  line("f_c", s.f_c);
  line("f_scs", s.f_scs);
  line("t_sym", s.t_sym);
  line("tau", s.tau);
  line("b_ssb", s.b_ssb);
  line("t_ssb", s.t_ssb);
  line("n_rs", static_cast<double>(s.n_rs));
  line("b_tot", s.b_tot);
  line("t_tot", s.t_tot);
  line("p_t", s.p_t);
  line("thermal_noise_density", s.thermal_noise_density);
  line("k", s.k);
  const auto& d = c.deploy;
  out += "\n[deployment]\n";
  line("lambda_b", d.lambda_b);
  line("lambda_m", d.lambda_m);
  line("lambda_s", d.lambda_s);
  line("r_b", d.r_b);
  line("n_b", d.n_b);
  line("n_m", d.n_m);
  line("v", d.v);
  out += "\n[pattern]\n";
  line("d_max_req", c.d_max_req);
  line("v_max_req", c.v_max_req);
  return out;
}

}  // namespace isac_thz
