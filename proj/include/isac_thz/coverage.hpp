#pragma once
// Coverage probability of a user at distance r1 by inverting the characteristic
// function of interference plus absorption noise.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "misalignment.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "sensing.hpp"
#include "specfun.hpp"

namespace isac_thz {

// Where the interferer field starts: at contact distance 2 r_b, or at the serving distance r1.
enum class LowerBoundMode { theorem, derivation };

inline const char* lower_bound_name(LowerBoundMode m) {
  return m == LowerBoundMode::theorem ? "theorem" : "derivation";
}

inline LowerBoundMode parse_lower_bound(const std::string& s) {
  if (s == "theorem") return LowerBoundMode::theorem;
  if (s == "derivation") return LowerBoundMode::derivation;
  throw parse_error("unknown lower-bound mode '" + s + "' (expected theorem or derivation)");
}

inline QuadratureSpec coverage_quadrature() {
  QuadratureSpec q;
  q.abs_tol = 1e-9;
  q.rel_tol = 1e-9;
  q.max_subdivisions = 20000;
  q.tail_cutoff_envelope = 1e-12;
  return q;
}

struct CoverageQuery {
  double r1 = 20.0;
  double threshold = 1.0;  // linear SINR
  Scheme scheme = Scheme::jsrs;
  QuadratureSpec integration = coverage_quadrature();
  LowerBoundMode lower_bound_mode = LowerBoundMode::theorem;
};

struct CoverageResult {
  Scheme scheme = Scheme::jsrs;
  double r1 = 0.0;
  double threshold = 0.0;
  double p_cvp = 0.0;
  double p_cm = 0.0;
  double p_ms = 0.0;
  double integral_abs_error = 0.0;
  double p_cm_raw = 0.0;  // before clamping into [0, 1]
};

struct ShotNoiseParts {
  double f_r = 0.0;
  double f_i = 0.0;
};

inline QuadratureSpec field_quadrature() {
  QuadratureSpec q;
  q.rel_tol = 1e-10;
  return q;
}

// Shot-noise field of interferers and absorption-noise sources beyond L. Each
// source at distance r contributes amplitude * r^-2 e^{-K r}; it interferes
// with probability p_I(r) and otherwise only re-radiates absorption noise.
class ShotNoiseField {
 public:
  ShotNoiseField(const LinkBudget& b, const Deployment& d, const SystemParams& sys, double p_ms,
                 double lower, QuadratureSpec spec = field_quadrature())
      : K_(b.K), L_(lower), r_b_(d.r_b), lam_(d.lambda_all()), spec_(spec) {
    if (!(lower >= 2.0 * d.r_b)) throw domain_error("ShotNoiseField: lower bound must be >= 2 r_b");
    const double kappa = absorption_noise_factor(b, d);
    amp_interf_ = b.A * (1.0 + kappa);
    amp_noise_ = b.A * kappa;
    w_s_ = beam_weight(d, sys, p_ms);
    decay_ = 2.0 * lam_ * r_b_;
  }

  double lower() const { return L_; }

  double interference_probability(double r) const { return w_s_ * std::exp(-decay_ * (r - 2.0 * r_b_)); }

  // int_L^inf r [B_I q p_I + B_UI q (1 - p_I)] dr with q = r^-2 e^{-K r}; equals f_i'(0) / (2 pi).
  double mean_kernel() const {
    double m = 0.0;
    if (amp_noise_ > 0.0 && K_ > 0.0) m += amp_noise_ * exp_integral_e1(K_ * L_);
    if (w_s_ > 0.0)
      m += (amp_interf_ - amp_noise_) * w_s_ * std::exp(2.0 * decay_ * r_b_) *
           exp_integral_e1((K_ + decay_) * L_);
    return m;
  }

  ShotNoiseParts parts(double s) const {
    if (!(s > 0.0)) throw domain_error("shot_noise_parts: s must be > 0");
    Pair total = branch(s, amp_interf_, true) + branch(s, amp_noise_, false);
    return {total.a, total.b};
  }

  // Memoized on exact s; the inversion revisits the same nodes for envelope and phase.
  ShotNoiseParts parts_cached(double s) const {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    auto p = parts(s);
    cache_.emplace(s, p);
    return p;
  }

  // Distance at which amplitude-scaled path gain c0 r^-2 e^{-K r} equals u.
  double distance_for(double c0, double u) const {
    const double t = std::log(c0 / u);
    if (K_ == 0.0) return std::exp(0.5 * t);
    // Solve 2x + K e^x = t for x = ln r; convex and increasing, so Newton from
    // the right converges monotonically.
    double x = 0.5 * t;
    if (K_ * std::exp(x) > 2.0) {
      const double xa = std::log(std::max(t, 1e-300) / K_);
      if (xa < x && 2.0 * xa + K_ * std::exp(xa) - t >= 0.0) x = xa;
    }
    for (int i = 0; i < 200; ++i) {
      const double ex = K_ * std::exp(x);
      const double step = (2.0 * x + ex - t) / (2.0 + ex);
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return std::exp(x);
  }

 private:
  // Oscillation zones, in units of the phase u = 2 pi s * amplitude * q(r).
  static constexpr double u_far = 1.0;
  static constexpr double u_near = 128.0 * pi;

  double weight(double r, bool interf) const {
    const double p = interference_probability(r);
    return interf ? p : 1.0 - p;
  }
  double weight_slope(double r, bool interf) const {
    const double dp = -decay_ * interference_probability(r);
    return interf ? dp : -dp;
  }

  // int_L^inf r w(r) [1 - cos u(r), sin u(r)] dr for one mark class.
  Pair branch(double s, double amplitude, bool interf) const {
    if (amplitude == 0.0 || (interf && w_s_ == 0.0)) return {};
    const double c0 = two_pi * s * amplitude;
    auto u_of = [&](double r) { return c0 / (r * r) * std::exp(-K_ * r); };
    const double u_lower = u_of(L_);
    Pair total{};

    // Far zone: phase below one radian, integrate in r.
    const double r_far = u_lower > u_far ? distance_for(c0, u_far) : L_;
    auto far = [&](double r) {
      const double u = u_of(r);
      const double rw = r * weight(r, interf);
      const double h = std::sin(0.5 * u);
      return Pair{rw * 2.0 * h * h, rw * std::sin(u)};
    };
    total += integrate_semi_infinite<Pair>(far, r_far, spec_, std::max(r_far, 1.0)).value;
    if (u_lower <= u_far) return total;

    // Middle zone: change variables to u and integrate half-period panels.
    // r dr = -h(u)/u du with h = r^2 w / (2 + K r).
    auto g_of = [&](double u, double& r) {
      r = distance_for(c0, u);
      return r * r * weight(r, interf) / ((2.0 + K_ * r) * u);
    };
    auto middle = [&](double u) {
      double r;
      const double g = g_of(u, r);
      const double h = std::sin(0.5 * u);
      return Pair{g * 2.0 * h * h, g * std::sin(u)};
    };
    const double u_top = std::min(u_lower, u_near);
    double a = u_far;
    for (int k = 1; a < u_top; ++k) {
      const double b = std::min(u_top, k * pi);
      total += integrate_adaptive<Pair>(middle, a, b, spec_).value;
      a = b;
    }
    if (u_lower <= u_near) return total;

    // Near zone: the non-oscillating part in closed form, the oscillating part
    // by two integrations by parts.
    const double r_c = distance_for(c0, u_near);
    total.a += interf ? w_s_ * exp_moment(L_, r_c) : 0.5 * (r_c * r_c - L_ * L_) - w_s_ * exp_moment(L_, r_c);
    auto g_and_slope = [&](double u, double r, double& g, double& dg) {
      const double w = weight(r, interf);
      const double dw = weight_slope(r, interf);
      const double den = 2.0 + K_ * r;
      const double h = r * r * w / den;
      const double dh_dr = ((2.0 * r * w + r * r * dw) * den - r * r * w * K_) / (den * den);
      const double dr_du = -r / (u * den);
      g = h / u;
      dg = dh_dr * dr_du / u - h / (u * u);
    };
    double g_lo, dg_lo, g_hi, dg_hi;
    g_and_slope(u_near, r_c, g_lo, dg_lo);
    g_and_slope(u_lower, L_, g_hi, dg_hi);
    const double cos_lo = std::cos(u_near), sin_lo = std::sin(u_near);
    const double cos_hi = std::cos(u_lower), sin_hi = std::sin(u_lower);
    const double cos_part = (g_hi * sin_hi + dg_hi * cos_hi) - (g_lo * sin_lo + dg_lo * cos_lo);
    const double sin_part = (-g_hi * cos_hi + dg_hi * sin_hi) - (-g_lo * cos_lo + dg_lo * sin_lo);
    total.a -= cos_part;
    total.b += sin_part;
    return total;
  }

  // int_a^b r e^{-decay (r - 2 r_b)} dr.
  double exp_moment(double a, double b) const {
    if (decay_ == 0.0) return 0.5 * (b * b - a * a);
    const double k = decay_;
    const double ea = std::exp(-k * (a - 2.0 * r_b_));
    const double eb = std::exp(-k * (b - 2.0 * r_b_));
    return (ea * (k * a + 1.0) - eb * (k * b + 1.0)) / (k * k);
  }

  double K_, L_, r_b_, lam_;
  double amp_interf_ = 0.0, amp_noise_ = 0.0, w_s_ = 0.0, decay_ = 0.0;
  QuadratureSpec spec_;
  mutable std::unordered_map<double, ShotNoiseParts> cache_;
};

inline double coverage_lower_bound(const CoverageQuery& q, const Deployment& d) {
  return q.lower_bound_mode == LowerBoundMode::theorem ? 2.0 * d.r_b : q.r1;
}

inline ShotNoiseParts shot_noise_parts(double s, const CoverageQuery& q, const LinkBudget& b,
                                       const Deployment& d, const SystemParams& sys, double p_ms) {
  return ShotNoiseField(b, d, sys, p_ms, coverage_lower_bound(q, d)).parts(s);
}

// Pieces of the inversion integral that do not depend on the threshold.
struct CoverageKernel {
  const ShotNoiseField* field;
  double lambda_b;
  double noise;       // effective noise at r1, W
  double mean_slope;  // phase_lo'(0)

  CoverageKernel(const ShotNoiseField& f, const LinkBudget& b, const Deployment& d, const SystemParams& sys,
                 double r1)
      : field(&f), lambda_b(d.lambda_b), noise(effective_noise(b, d, sys, r1)) {
    mean_slope = -two_pi * lambda_b * two_pi * f.mean_kernel() - two_pi * noise;
  }
  double envelope(double s) const {
    if (lambda_b == 0.0) return 1.0;
    return std::exp(-two_pi * lambda_b * field->parts_cached(s).f_r);
  }
  double phase_lo(double s) const {
    const double fi = lambda_b == 0.0 ? 0.0 : field->parts_cached(s).f_i;
    return -two_pi * lambda_b * fi - two_pi * s * noise;
  }
};

// int_0^inf env sin(phase) / (pi s) ds for phase = 2 pi s * level + phase_lo.
inline QuadResult<> coverage_sine_integral(const CoverageKernel& k, double level, const QuadratureSpec& spec) {
  auto env = [&](double s) { return k.envelope(s); };
  auto phase = [&](double s) { return two_pi * s * level + k.phase_lo(s); };
  return integrate_sine_kernel(env, phase, two_pi * level + k.mean_slope, 0.0, spec);
}

inline CoverageResult finish_coverage(const CoverageQuery& q, double p_ms, double hi, double lo, double err) {
  CoverageResult r;
  r.scheme = q.scheme;
  r.r1 = q.r1;
  r.threshold = q.threshold;
  r.p_ms = p_ms;
  r.p_cm_raw = hi - lo;
  r.integral_abs_error = err;
  const double tol = std::max(err, q.integration.abs_tol);
  if (r.p_cm_raw < -10.0 * tol || r.p_cm_raw > 1.0 + 10.0 * tol)
    throw error("coverage: conditional coverage " + std::to_string(r.p_cm_raw) +
                " outside [0, 1] beyond integration tolerance");
  r.p_cm = std::clamp(r.p_cm_raw, 0.0, 1.0);
  r.p_cvp = (1.0 - p_ms) * r.p_cm;
  return r;
}

inline void validate_query(const CoverageQuery& q, const Deployment& d) {
  q.integration.validate();
  if (!(q.r1 >= 2.0 * d.r_b)) throw validation_error("coverage: r1 must be >= 2 r_b");
  if (!(q.threshold > 0.0)) throw validation_error("coverage: threshold must be > 0");
}

// Coverage for a given misalignment probability.
inline CoverageResult coverage_probability_given(const CoverageQuery& q, const LinkBudget& b, const Deployment& d,
                                                 const SystemParams& sys, double p_ms) {
  validate_query(q, d);
  ShotNoiseField field(b, d, sys, p_ms, coverage_lower_bound(q, d));
  CoverageKernel kernel(field, b, d, sys, q.r1);
  const double level = received_power(b, q.r1) / q.threshold;
  auto hi = coverage_sine_integral(kernel, level, q.integration);
  auto lo = coverage_sine_integral(kernel, 0.0, q.integration);
  return finish_coverage(q, p_ms, hi.value, lo.value, hi.abs_error + lo.abs_error);
}

inline CoverageResult coverage_probability(const CoverageQuery& q, const LinkBudget& b, const Deployment& d,
                                           const SystemParams& sys, const SensingAbility& ability) {
  const double p_ms = beam_misalignment(d, ability, sys.tau).p_ms;
  return coverage_probability_given(q, b, d, sys, p_ms);
}

// Cross product of r1 x threshold x scheme. Rows come back ordered by
// (scheme, r1, threshold) in input order. Schemes with the same misalignment
// share a field; the threshold-free half of the integral is computed once per r1.
inline std::vector<CoverageResult> coverage_sweep(const Config& c, const std::vector<double>& r1_grid,
                                                  const std::vector<double>& threshold_grid,
                                                  const std::vector<Scheme>& schemes,
                                                  LowerBoundMode mode = LowerBoundMode::theorem,
                                                  const QuadratureSpec& spec = coverage_quadrature()) {
  if (r1_grid.empty() || threshold_grid.empty() || schemes.empty())
    throw validation_error("coverage_sweep: grids must be non-empty");
  const auto budget = make_link_budget(c.sys, c.deploy);
  std::vector<double> p_ms(schemes.size());
  for (std::size_t i = 0; i < schemes.size(); ++i) p_ms[i] = scheme_misalignment(schemes[i], c).p_ms;

  struct Group {
    std::size_t scheme;
    std::size_t r1;
  };
  std::vector<Group> groups;
  for (std::size_t s = 0; s < schemes.size(); ++s)
    for (std::size_t r = 0; r < r1_grid.size(); ++r) groups.push_back({s, r});
  std::vector<CoverageResult> rows(groups.size() * threshold_grid.size());

  parallel_chunks(groups.size(), 1, [&](unsigned, std::size_t begin, std::size_t end) {
    // Per-worker field cache keyed by (p_ms, lower bound).
    std::map<std::pair<double, double>, std::unique_ptr<ShotNoiseField>> fields;
    for (std::size_t gi = begin; gi < end; ++gi) {
      const auto& g = groups[gi];
      CoverageQuery q;
      q.r1 = r1_grid[g.r1];
      q.scheme = schemes[g.scheme];
      q.integration = spec;
      q.lower_bound_mode = mode;
      q.threshold = threshold_grid.front();
      validate_query(q, c.deploy);
      const double lower = coverage_lower_bound(q, c.deploy);
      auto& field = fields[{p_ms[g.scheme], lower}];
      if (!field) field = std::make_unique<ShotNoiseField>(budget, c.deploy, c.sys, p_ms[g.scheme], lower);
      CoverageKernel kernel(*field, budget, c.deploy, c.sys, q.r1);
      const auto lo = coverage_sine_integral(kernel, 0.0, spec);
      for (std::size_t t = 0; t < threshold_grid.size(); ++t) {
        q.threshold = threshold_grid[t];
        validate_query(q, c.deploy);
        const auto hi = coverage_sine_integral(kernel, received_power(budget, q.r1) / q.threshold, spec);
        rows[gi * threshold_grid.size() + t] =
            finish_coverage(q, p_ms[g.scheme], hi.value, lo.value, hi.abs_error + lo.abs_error);
      }
    }
  });
  return rows;
}

}  // namespace isac_thz
