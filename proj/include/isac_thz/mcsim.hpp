#pragma once
// Poisson-point-process Monte Carlo used as an independent check of the closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "coverage.hpp"
#include "errors.hpp"
#include "misalignment.hpp"
#include "parallel.hpp"
#include "sensing.hpp"

namespace isac_thz {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64: one add and one mix per draw, seeding is free, so every trial,
// ring and link can own a stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream,
                                std::uint64_t sub = 0) {
  std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  k = mix64(k + trial);
  k = mix64(k ^ (stream * 0xbb67ae8584caa73bULL));
  return mix64(k + sub);
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }

struct Scene {
  double window_radius = 0.0;
  std::vector<Point> bs_points;
  std::vector<Point> mt_points;
  std::vector<Point> blocker_points;
  std::uint64_t rng_seed = 0;
  double guard = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long trials = 0;
};

// How links see blockers: one shared scene, or an independent field per link.
enum class BlockageCoupling { per_link, shared };

inline const char* coupling_name(BlockageCoupling c) { return c == BlockageCoupling::per_link ? "per_link" : "shared"; }

inline BlockageCoupling parse_coupling(const std::string& s) {
  if (s == "per_link" || s == "per-link") return BlockageCoupling::per_link;
  if (s == "shared") return BlockageCoupling::shared;
  throw parse_error("unknown blockage coupling '" + s + "' (expected per_link or shared)");
}

struct McOptions {
  double window_radius = 250.0;  // m
  BlockageCoupling coupling = BlockageCoupling::per_link;
  LowerBoundMode lower_bound_mode = LowerBoundMode::theorem;
};

inline McEstimate bernoulli_estimate(long hits, long trials) {
  McEstimate e;
  e.trials = trials;
  e.mean = static_cast<double>(hits) / static_cast<double>(trials);
  e.std_error = trials > 1 ? std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials - 1)) : 0.0;
  return e;
}

namespace mc {

inline constexpr double ring_width = 25.0;  // m; windows nest ring by ring
enum Stream : std::uint64_t { bs = 1, mt = 2, blocker = 3, marks = 4, link = 5, trial_level = 6, box = 7 };

// PPP points of one annulus [k w, (k+1) w), drawn from the ring's own stream.
inline void ring_points(double density, int ring, std::uint64_t key, std::vector<Point>& out) {
  if (density <= 0.0) return;
  const double r_in = ring * ring_width;
  const double r_out = r_in + ring_width;
  const double area = pi * (r_out * r_out - r_in * r_in);
  SplitMix64 rng(key);
  std::poisson_distribution<long> count(density * area);
  const long n = count(rng);
  for (long i = 0; i < n; ++i) {
    const double r = std::sqrt(r_in * r_in + rng.uniform() * (r_out * r_out - r_in * r_in));
    const double a = two_pi * rng.uniform();
    out.push_back({r * std::cos(a), r * std::sin(a)});
  }
}

// PPP within radius R, ring-nested: the points inside R do not depend on R.
inline std::vector<Point> disc_points(double density, double radius, std::uint64_t seed, std::uint64_t trial,
                                      std::uint64_t stream) {
  std::vector<Point> pts;
  const int rings = static_cast<int>(std::ceil(radius / ring_width));
  for (int k = 0; k < rings; ++k) {
    const std::size_t first = pts.size();
    ring_points(density, k, stream_key(seed, trial, stream, static_cast<std::uint64_t>(k)), pts);
    if ((k + 1) * ring_width > radius)
      pts.erase(std::remove_if(pts.begin() + static_cast<std::ptrdiff_t>(first), pts.end(),
                               [&](Point p) { return norm(p) > radius; }),
                pts.end());
  }
  return pts;
}

// Node center inside the link's corridor: within r_b of the segment, and
// between r_b past the transmitter and r_b short of the receiver.
inline bool in_corridor(Point p, Point from, Point to, double r_b) {
  const double dx = to.x - from.x, dy = to.y - from.y;
  const double len = std::hypot(dx, dy);
  const double px = p.x - from.x, py = p.y - from.y;
  const double along = (px * dx + py * dy) / len;
  const double across = std::abs(px * dy - py * dx) / len;
  return across < r_b && along >= r_b && along <= len - r_b;
}

inline bool same_point(Point a, Point b) { return a.x == b.x && a.y == b.y; }

// Fresh PPP of the given density around one link; true if any point lands in the corridor.
inline bool link_blocked_independent(Point from, Point to, double r_b, double density, std::uint64_t key) {
  if (density <= 0.0) return false;
  const double m = 2.0 * r_b;
  const double x0 = std::min(from.x, to.x) - m, x1 = std::max(from.x, to.x) + m;
  const double y0 = std::min(from.y, to.y) - m, y1 = std::max(from.y, to.y) + m;
  SplitMix64 rng(key);
  std::poisson_distribution<long> count(density * (x1 - x0) * (y1 - y0));
  const long n = count(rng);
  for (long i = 0; i < n; ++i) {
    const Point p{x0 + (x1 - x0) * rng.uniform(), y0 + (y1 - y0) * rng.uniform()};
    if (in_corridor(p, from, to, r_b)) return true;
  }
  return false;
}

inline bool any_in_corridor(const std::vector<Point>& pts, Point from, Point to, double r_b) {
  for (const auto& p : pts)
    if (!same_point(p, from) && !same_point(p, to) && in_corridor(p, from, to, r_b)) return true;
  return false;
}

template <class TrialFn>
McEstimate run_bernoulli(long trials, TrialFn&& trial) {
  if (trials < 1) throw domain_error("Monte Carlo: trials must be >= 1");
  constexpr std::size_t chunk = 4096;
  const std::size_t n = static_cast<std::size_t>(trials);
  std::vector<long> hits((n + chunk - 1) / chunk, 0);
  parallel_chunks(n, chunk, [&](unsigned, std::size_t begin, std::size_t end) {
    long h = 0;
    for (std::size_t t = begin; t < end; ++t) h += trial(static_cast<std::uint64_t>(t)) ? 1 : 0;
    hits[begin / chunk] = h;
  });
  long total = 0;
  for (long h : hits) total += h;
  return bernoulli_estimate(total, trials);
}

// The two nearest BSs of one trial, grown ring by ring until both are certain.
inline std::optional<std::pair<Point, Point>> nearest_two(double lambda_b, double window, std::uint64_t seed,
                                                          std::uint64_t trial) {
  std::vector<Point> pts;
  const int rings = static_cast<int>(std::ceil(window / ring_width));
  for (int k = 0; k < rings; ++k) {
    ring_points(lambda_b, k, stream_key(seed, trial, Stream::bs, static_cast<std::uint64_t>(k)), pts);
    std::erase_if(pts, [&](Point p) { return norm(p) > window; });
    if (pts.size() >= 2) {
      std::partial_sort(pts.begin(), pts.begin() + 2, pts.end(),
                        [](Point a, Point b) { return norm(a) < norm(b); });
      if (norm(pts[1]) <= (k + 1) * ring_width) return std::make_pair(pts[0], pts[1]);
    }
  }
  return std::nullopt;
}

}  // namespace mc

// Independent BS, MT and blocker PPPs on a disc; the typical MT sits at the origin.
inline Scene sample_scene(const Deployment& d, double window_radius, std::uint64_t seed, std::uint64_t trial = 0) {
  if (!(window_radius > 0.0)) throw domain_error("sample_scene: window_radius must be > 0");
  Scene s;
  s.window_radius = window_radius;
  s.rng_seed = seed;
  s.guard = 2.0 * d.r_b;
  s.bs_points = mc::disc_points(d.lambda_b, window_radius, seed, trial, mc::Stream::bs);
  s.mt_points = mc::disc_points(d.lambda_m, window_radius, seed, trial, mc::Stream::mt);
  s.blocker_points = mc::disc_points(d.lambda_s, window_radius, seed, trial, mc::Stream::blocker);
  return s;
}

// Any node other than the endpoints inside the corridor between from and to.
inline bool is_blocked(const Scene& scene, Point from, Point to, const Deployment& d) {
  if (!(std::hypot(to.x - from.x, to.y - from.y) >= 2.0 * d.r_b))
    throw domain_error("is_blocked: endpoints closer than 2 r_b");
  return mc::any_in_corridor(scene.blocker_points, from, to, d.r_b) ||
         mc::any_in_corridor(scene.mt_points, from, to, d.r_b) ||
         mc::any_in_corridor(scene.bs_points, from, to, d.r_b);
}

// Link of length r at a random bearing, blocked by MTs and blockers.
inline McEstimate estimate_blockage(const Deployment& d, double r, long trials, std::uint64_t seed,
                                    BlockageCoupling coupling = BlockageCoupling::per_link) {
  if (!(r >= 2.0 * d.r_b)) throw domain_error("estimate_blockage: r must be >= 2 r_b");
  return mc::run_bernoulli(trials, [&](std::uint64_t t) {
    SplitMix64 rng(stream_key(seed, t, mc::Stream::trial_level));
    const double a = two_pi * rng.uniform();
    const Point to{r * std::cos(a), r * std::sin(a)};
    if (coupling == BlockageCoupling::per_link)
      return mc::link_blocked_independent({}, to, d.r_b, d.lambda_obstacles(), stream_key(seed, t, mc::Stream::link));
    Scene s;
    s.mt_points = mc::disc_points(d.lambda_m, r + d.r_b, seed, t, mc::Stream::mt);
    s.blocker_points = mc::disc_points(d.lambda_s, r + d.r_b, seed, t, mc::Stream::blocker);
    return is_blocked(s, {}, to, d);
  });
}

// Blockage of the links to the two nearest BSs of one trial.
struct NearestLinks {
  bool found = false;
  bool first_blocked = false;
  bool second_blocked = false;
};

inline NearestLinks nearest_links(const Deployment& d, double window, std::uint64_t seed, std::uint64_t t,
                                  BlockageCoupling coupling) {
  NearestLinks out;
  const auto two = mc::nearest_two(d.lambda_b, window, seed, t);
  if (!two) return out;
  out.found = true;
  const auto [p1, p2] = *two;
  auto blocked = [&](Point p, std::uint64_t link, const Scene* s) {
    if (norm(p) < 2.0 * d.r_b) return false;  // corridor is empty
    if (coupling == BlockageCoupling::per_link)
      return mc::link_blocked_independent({}, p, d.r_b, d.lambda_obstacles(), stream_key(seed, t, mc::Stream::link, link));
    return mc::any_in_corridor(s->mt_points, {}, p, d.r_b) || mc::any_in_corridor(s->blocker_points, {}, p, d.r_b);
  };
  if (coupling == BlockageCoupling::shared) {
    Scene s;
    const double reach = norm(p2) + d.r_b;
    s.mt_points = mc::disc_points(d.lambda_m, reach, seed, t, mc::Stream::mt);
    s.blocker_points = mc::disc_points(d.lambda_s, reach, seed, t, mc::Stream::blocker);
    out.first_blocked = blocked(p1, 0, &s);
    out.second_blocked = blocked(p2, 1, &s);
  } else {
    out.first_blocked = blocked(p1, 0, nullptr);
    out.second_blocked = blocked(p2, 1, nullptr);
  }
  return out;
}

// Both nearest BSs blocked. Trials without two BSs in the window count as timeouts.
inline McEstimate estimate_timeout(const Deployment& d, long trials, std::uint64_t seed,
                                   BlockageCoupling coupling = BlockageCoupling::per_link, double window = 100.0) {
  return mc::run_bernoulli(trials, [&](std::uint64_t t) {
    const auto links = nearest_links(d, window, seed, t, coupling);
    return !links.found || (links.first_blocked && links.second_blocked);
  });
}

// Distances of the nearest and second-nearest BS, one pair per sample.
inline std::vector<std::pair<double, double>> nearest_two_distances(const Deployment& d, long samples,
                                                                    std::uint64_t seed, double window = 100.0) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (long t = 0; t < samples; ++t)
    if (auto two = mc::nearest_two(d.lambda_b, window, seed, static_cast<std::uint64_t>(t)))
      out.emplace_back(norm(two->first), norm(two->second));
  return out;
}

// Misaligned if both nearest BSs are blocked, or the nearest is reachable but
// the MT crossed a beam boundary its speed estimate did not predict. The
// distance to the next boundary along the track is exponential with rate mu_g.
inline McEstimate estimate_misalignment(const Deployment& d, const SensingAbility& a, double tau, long trials,
                                        std::uint64_t seed, BlockageCoupling coupling = BlockageCoupling::per_link,
                                        double window = 100.0) {
  const double mu = beam_switch_density(d);
  const double lag = std::max((d.v - a.delta_v) * tau - a.delta_db, 0.0);
  const double travel = d.v * tau;
  return mc::run_bernoulli(trials, [&](std::uint64_t t) {
    const auto links = nearest_links(d, window, seed, t, coupling);
    if (!links.found || (links.first_blocked && links.second_blocked)) return true;
    if (links.first_blocked) return false;
    SplitMix64 rng(stream_key(seed, t, mc::Stream::trial_level));
    const double boundary = -std::log1p(-rng.uniform()) / mu;
    return boundary < travel && boundary > lag;
  });
}

// Serving BS pinned at (r1, 0). Every other BS in [L, window] adds absorption
// noise; it also interferes when its beam phase, both beam orientations and an
// unblocked corridor line up.
inline McEstimate estimate_coverage_given(const Deployment& d, const LinkBudget& b, const SystemParams& sys,
                                          double p_ms, double r1, double threshold, long trials, std::uint64_t seed,
                                          const McOptions& opt = {}) {
  if (!(r1 >= 2.0 * d.r_b)) throw domain_error("estimate_coverage: r1 must be >= 2 r_b");
  if (!(threshold > 0.0)) throw domain_error("estimate_coverage: threshold must be > 0");
  const double lower = opt.lower_bound_mode == LowerBoundMode::theorem ? 2.0 * d.r_b : r1;
  const double kappa = absorption_noise_factor(b, d);
  const double signal = received_power(b, r1);
  const double base_noise = effective_noise(b, d, sys, r1);
  const double sweep = d.n_b * sys.t_ssb / sys.tau;
  const double half_b = 0.5 * d.theta_b(), half_m = 0.5 * d.theta_m();
  const Point serving{r1, 0.0};
  const int rings = static_cast<int>(std::ceil(opt.window_radius / mc::ring_width));

  auto angle_gap = [](double a, double b) {
    double g = std::fmod(std::abs(a - b), two_pi);
    return g > pi ? two_pi - g : g;
  };

  return mc::run_bernoulli(trials, [&](std::uint64_t t) {
    SplitMix64 top(stream_key(seed, t, mc::Stream::trial_level));
    if (top.uniform() < p_ms) return false;

    // Shared-scene obstacles are built lazily, only when some link needs them.
    std::optional<Scene> obstacles;
    auto shared_blocked = [&](Point bs, const std::vector<Point>& all_bs) {
      if (!obstacles) {
        obstacles.emplace();
        obstacles->mt_points = mc::disc_points(d.lambda_m, opt.window_radius, seed, t, mc::Stream::mt);
        obstacles->blocker_points = mc::disc_points(d.lambda_s, opt.window_radius, seed, t, mc::Stream::blocker);
      }
      return mc::any_in_corridor(obstacles->mt_points, {}, bs, d.r_b) ||
             mc::any_in_corridor(obstacles->blocker_points, {}, bs, d.r_b) ||
             mc::any_in_corridor(all_bs, {}, bs, d.r_b) || mc::in_corridor(serving, {}, bs, d.r_b);
    };

    std::vector<Point> all_bs;
    if (opt.coupling == BlockageCoupling::shared)
      all_bs = mc::disc_points(d.lambda_b, opt.window_radius, seed, t, mc::Stream::bs);

    double total = base_noise;
    std::vector<Point> ring;
    for (int k = 0; k < rings; ++k) {
      ring.clear();
      mc::ring_points(d.lambda_b, k, stream_key(seed, t, mc::Stream::bs, static_cast<std::uint64_t>(k)), ring);
      SplitMix64 marks(stream_key(seed, t, mc::Stream::marks, static_cast<std::uint64_t>(k)));
      for (std::size_t j = 0; j < ring.size(); ++j) {
        const Point p = ring[j];
        const double r = norm(p);
        // Marks are drawn for every point so the stream layout ignores the window and bound.
        const double phase = marks.uniform();
        const double data_misaligned = marks.uniform();
        const double bs_beam = two_pi * marks.uniform();
        const double mt_beam = two_pi * marks.uniform();
        if (r > opt.window_radius || r < lower) continue;
        const double gain = b.A / (r * r) * std::exp(-b.K * r);
        total += kappa * gain;
        const bool pointing = phase < sweep || data_misaligned < p_ms;
        if (!pointing) continue;
        const double to_mt = std::atan2(-p.y, -p.x);
        const double to_bs = std::atan2(p.y, p.x);
        if (angle_gap(bs_beam, to_mt) >= half_b || angle_gap(mt_beam, to_bs) >= half_m) continue;
        bool blocked;
        if (opt.coupling == BlockageCoupling::per_link) {
          blocked = mc::link_blocked_independent({}, p, d.r_b, d.lambda_all(),
                                                 stream_key(seed, t, mc::Stream::link,
                                                            (static_cast<std::uint64_t>(k) << 32) | j));
        } else {
          blocked = shared_blocked(p, all_bs);
        }
        if (!blocked) total += gain;
      }
    }
    return signal / total > threshold;
  });
}

inline McEstimate estimate_coverage(const Deployment& d, const LinkBudget& b, const SystemParams& sys,
                                    const SensingAbility& a, double r1, double threshold, long trials,
                                    std::uint64_t seed, const McOptions& opt = {}) {
  const double p_ms = beam_misalignment(d, a, sys.tau).p_ms;
  return estimate_coverage_given(d, b, sys, p_ms, r1, threshold, trials, seed, opt);
}

inline double sigmas_off(const McEstimate& e, double analytic) {
  if (e.std_error > 0.0) return (e.mean - analytic) / e.std_error;
  return e.mean == analytic ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), e.mean - analytic);
}

}  // namespace isac_thz
