#pragma once
// Adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges, plus a
// period-by-period integrator for sine kernels env(s) sin(phi(s)) / (pi s).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace isac_thz {

struct QuadratureSpec {
  double abs_tol = 1e-300;
  double rel_tol = 1e-11;
  int max_subdivisions = 4000;
  double tail_cutoff_envelope = 1e-14;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(tail_cutoff_envelope > 0.0))
      throw validation_error("QuadratureSpec: tolerances must be > 0");
    if (max_subdivisions < 1) throw validation_error("QuadratureSpec: max_subdivisions must be >= 1");
  }
};

template <class V = double>
struct QuadResult {
  V value{};
  double abs_error = 0.0;
  long evaluations = 0;
};

// Two real integrals sharing one set of nodes (real and imaginary parts of a
// transform, kept as separate reals).
struct Pair {
  double a = 0.0;
  double b = 0.0;
  Pair& operator+=(const Pair& o) { a += o.a; b += o.b; return *this; }
  Pair& operator-=(const Pair& o) { a -= o.a; b -= o.b; return *this; }
  friend Pair operator+(Pair x, const Pair& y) { return x += y; }
  friend Pair operator-(Pair x, const Pair& y) { return x -= y; }
  friend Pair operator*(Pair x, double s) { return {x.a * s, x.b * s}; }
  friend Pair operator*(double s, Pair x) { return {x.a * s, x.b * s}; }
};

inline double quad_norm(double v) { return std::abs(v); }
inline double quad_norm(const Pair& p) { return std::max(std::abs(p.a), std::abs(p.b)); }

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule.
inline constexpr std::array<double, 11> gk21_nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> gk21_weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931532780, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> g10_weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class V>
struct Panel {
  double a, b;
  V value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <class V, class F>
Panel<V> gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const V fc = f(c);
  V kron = fc * gk21_weights[10];
  V gauss{};
  for (int i = 0; i < 10; ++i) {
    const double dx = h * gk21_nodes[i];
    const V sum = f(c - dx) + f(c + dx);
    kron += sum * gk21_weights[i];
    if (i % 2 == 1) gauss += sum * g10_weights[i / 2];
  }
  return {a, b, kron * h, quad_norm((kron - gauss) * h)};
}

}  // namespace detail

// Globally adaptive bisection on [a, b] driven by the Kronrod-Gauss difference.
template <class V = double, class F>
QuadResult<V> integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
  QuadResult<V> out;
  if (a == b) return out;
  std::priority_queue<detail::Panel<V>> heap;
  auto first = detail::gk21<V>(f, a, b);
  out.evaluations = 21;
  V total = first.value;
  double err = first.err;
  heap.push(first);
  int subdivisions = 1;
  while (err > std::max(spec.abs_tol, spec.rel_tol * quad_norm(total))) {
    if (subdivisions >= spec.max_subdivisions)
      throw convergence_error("integrate_adaptive: subdivision limit reached", quad_norm(total), err);
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval can no longer be split in floating point; accept what we have.
      heap.push(worst);
      break;
    }
    auto left = detail::gk21<V>(f, worst.a, mid);
    auto right = detail::gk21<V>(f, mid, worst.b);
    out.evaluations += 42;
    total = total - worst.value + left.value + right.value;
    err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Recompute from the panels to shed the running-sum drift.
  V sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().err;
    heap.pop();
  }
  out.value = sum;
  out.abs_error = esum;
  return out;
}

// int_lower^inf f. Panels of doubling width starting at `scale`; stops when two
// consecutive panels fall below tail_cutoff_envelope relative to the running total.
template <class V = double, class F>
QuadResult<V> integrate_semi_infinite(F&& f, double lower, const QuadratureSpec& spec,
                                      double scale = 1.0) {
  spec.validate();
  if (!(scale > 0.0)) throw domain_error("integrate_semi_infinite: scale must be > 0");
  QuadResult<V> out;
  double a = lower;
  double width = scale;
  int quiet = 0;
  for (int panel = 0; panel < 2000; ++panel) {
    const double b = a + width;
    if (!std::isfinite(b)) break;
    auto part = integrate_adaptive<V>(f, a, b, spec);
    out.value += part.value;
    out.abs_error += part.abs_error;
    out.evaluations += part.evaluations;
    const double contribution = quad_norm(part.value) + part.abs_error;
    if (contribution <= spec.tail_cutoff_envelope * quad_norm(out.value) ||
        contribution <= spec.abs_tol) {
      if (++quiet >= 2) {
        out.abs_error += contribution;
        return out;
      }
    } else {
      quiet = 0;
    }
    a = b;
    width *= 2.0;
  }
  throw convergence_error("integrate_semi_infinite: tail did not decay", quad_norm(out.value),
                          out.abs_error);
}

// Accelerated limit of a partial-sum sequence by repeated pairwise averaging.
// For alternating half-period sums this is the Euler transform.
inline double euler_average(const std::vector<double>& sums, std::size_t levels) {
  const std::size_t n = sums.size();
  if (n == 0) return 0.0;
  levels = std::min(levels, n - 1);
  std::vector<double> row(sums.end() - static_cast<std::ptrdiff_t>(levels + 1), sums.end());
  for (std::size_t l = 0; l < levels; ++l)
    for (std::size_t i = 0; i + 1 < row.size() - l; ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
  return row[0];
}

// int_lower^inf env(s) sin(phase(s)) / (pi s) ds with phase(0) = 0.
// `slope` is phase'(0); when absent it is estimated by Richardson differences.
template <class Env, class Phase>
QuadResult<> integrate_sine_kernel(Env&& env, Phase&& phase, std::optional<double> slope,
                                   double lower, const QuadratureSpec& spec) {
  spec.validate();
  if (lower < 0.0) throw domain_error("integrate_sine_kernel: lower must be >= 0");
  QuadResult<> out;
  if (!slope) {
    double h = 1e-6;
    double prev = phase(h) / h;
    bool ok = false;
    for (int i = 0; i < 30; ++i) {
      h *= 0.5;
      const double cur = phase(h) / h;
      if (std::abs(cur - prev) <= 1e-7 * std::max(std::abs(cur), 1e-300)) {
        slope = 2.0 * cur - prev;
        ok = true;
        break;
      }
      prev = cur;
    }
    if (!ok) throw domain_error("integrate_sine_kernel: phase is not differentiable at s = 0");
  }
  double omega = std::abs(*slope);
  if (!(omega > 1e-300)) {
    // Flat at the origin: take the panel width from where the phase first reaches one radian.
    omega = 0.0;
    for (double s = 1e-30; s < 1e30; s *= 2.0)
      if (std::abs(phase(s)) >= 1.0) {
        omega = 1.0 / s;
        break;
      }
    if (omega == 0.0) return out;
  }

  auto integrand = [&](double s) { return env(s) * std::sin(phase(s)) / (pi * s); };
  double a = lower;
  if (lower == 0.0) {
    // Gauss-Kronrod nodes avoid s = 0, where the integrand tends to env * slope / pi,
    // so the origin panel goes through the same adaptive rule as the rest.
    const double eps = 1e-3 * pi / omega;
    auto origin = integrate_adaptive<double>(integrand, 0.0, eps, spec);
    out.value = origin.value;
    out.abs_error = origin.abs_error;
    out.evaluations = origin.evaluations;
    a = eps;
    // Up to the first half period the phase may still bend; cover it with doubling panels.
    const double first = pi / omega;
    while (a < first) {
      const double b = std::min(first, 2.0 * a);
      auto part = integrate_adaptive<double>(integrand, a, b, spec);
      out.value += part.value;
      out.abs_error += part.abs_error;
      out.evaluations += part.evaluations;
      a = b;
    }
  }

  constexpr std::size_t euler_levels = 12;
  std::vector<double> sums;
  std::vector<double> estimates;
  double phase_a = phase(a);
  double panel_errors = out.abs_error;
  double previous_part = 0.0;
  int alternating = 0;  // consecutive panels whose contributions flip sign
  for (int k = 0; k < spec.max_subdivisions; ++k) {
    const double b = a + pi / omega;
    auto part = integrate_adaptive<double>(integrand, a, b, spec);
    out.value += part.value;
    out.evaluations += part.evaluations;
    panel_errors += part.abs_error;
    sums.push_back(out.value);
    estimates.push_back(euler_average(sums, euler_levels));

    alternating = part.value * previous_part < 0.0 ? alternating + 1 : 0;
    previous_part = part.value;
    const double phase_b = phase(b);
    const double local = std::abs(phase_b - phase_a) / (b - a);
    omega = std::clamp(local, 0.5 * omega, 2.0 * omega);
    phase_a = phase_b;
    a = b;

    const double est = estimates.back();
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(est));
    if (std::abs(env(b)) < 1e-12 * std::abs(out.value) && std::abs(part.value) <= tol) {
      out.abs_error = panel_errors + std::abs(part.value);
      return out;
    }
    const std::size_t n = estimates.size();
    // Averaging is only trusted on an alternating tail; a monotone tail is
    // followed until the envelope cutoff instead.
    if (n >= 8 && alternating >= 4) {
      const double d1 = std::abs(estimates[n - 1] - estimates[n - 2]);
      const double d2 = std::abs(estimates[n - 2] - estimates[n - 3]);
      if (d1 <= tol && d2 <= tol) {
        out.value = est;
        out.abs_error = panel_errors + d1 + d2;
        return out;
      }
    }
  }
  const double partial = estimates.empty() ? out.value : estimates.back();
  throw convergence_error("integrate_sine_kernel: no convergence within max_subdivisions", partial,
                          std::abs(sums.empty() ? 0.0 : sums.back() - partial));
}

// Phase pair for integrals of the form env(s) [sin(phase_hi) - sin(phase_lo)] / (pi s).
struct OscillatoryIntegrand {
  std::function<double(double)> envelope;
  std::function<double(double)> phase_hi;
  std::function<double(double)> phase_lo;
  std::optional<double> slope_hi;
  std::optional<double> slope_lo;
};

inline QuadResult<> integrate_oscillatory(const OscillatoryIntegrand& f, double lower,
                                          const QuadratureSpec& spec) {
  auto hi = integrate_sine_kernel(f.envelope, f.phase_hi, f.slope_hi, lower, spec);
  auto lo = integrate_sine_kernel(f.envelope, f.phase_lo, f.slope_lo, lower, spec);
  return {hi.value - lo.value, hi.abs_error + lo.abs_error, hi.evaluations + lo.evaluations};
}

}  // namespace isac_thz
