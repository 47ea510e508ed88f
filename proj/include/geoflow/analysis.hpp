#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/section.hpp"

namespace geoflow {

// ---------------------------------------------------------------------------
// equicontinuity

enum class Verdict { satisfied, violated, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct ModulusOptions {
  double epsilon = 0.1;
  double t_max = 100.0;
  /// Pairs per ladder level with a random first element.
  int random_pairs = 200;
  /// Pairs are also seeded by perturbing these points.
  std::vector<UnitTangent> anchors;
  int pairs_per_anchor = 0;
  /// Pointwise modulus: every pair starts at this point and the random
  /// pairs become perturbations of it.
  std::optional<UnitTangent> pointwise;
  /// δ runs over ε/2, ε/4, ..., ε/2^levels.
  int levels = 10;
  /// Separations are sampled at t = k * time_step.
  double time_step = 0.05;
  PhaseMetric metric = PhaseMetric::sasaki;
  double tol = 1e-9;
  /// A clean level whose largest separation reaches this fraction of ε
  /// counts as a near miss.
  double near_miss = 0.9;
  std::uint64_t seed = 1;
};

struct PairWitness {
  UnitTangent a;
  UnitTangent b;
  /// Distance of the pair at t = 0.
  double initial_distance = 0.0;
  /// First sampled time with separation >= ε.
  double time = 0.0;
  double separation = 0.0;
};

enum class LevelOutcome { clean, near_miss, violated };

inline const char* to_string(LevelOutcome o) {
  switch (o) {
    case LevelOutcome::clean: return "clean";
    case LevelOutcome::near_miss: return "near_miss";
    case LevelOutcome::violated: return "violated";
  }
  return "unknown";
}

struct LevelResult {
  double delta = 0.0;
  int pairs_tested = 0;
  int escaped = 0;
  double max_separation = 0.0;
  LevelOutcome outcome = LevelOutcome::clean;
  std::optional<PairWitness> witness;
};

struct ModulusReport {
  double epsilon = 0.0;
  std::optional<double> delta;
  std::optional<PairWitness> witness;
  double t_max = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::vector<LevelResult> levels;
  std::string samples;
};

namespace detail {

/// Phase distance between Φ_t(a) and Φ_t(b) at t = k * dt, k = 0..k_max.
/// Returns the largest value and, if reached, the first sample >= stop_at.
struct GridScan {
  double max_distance = 0.0;
  std::optional<SeparationSample> first_exceed;
  bool escaped = false;
};

inline GridScan separation_on_grid(const Surface& surface, const UnitTangent& a, const UnitTangent& b, double dt,
                                   long k_max, PhaseMetric metric, double tol, double stop_at) {
  IntegratorOptions opts;
  opts.tol = tol;
  GeodesicIntegrator ia(surface, {a.base, a.direction, 0.0}, opts);
  GeodesicIntegrator ib(surface, {b.base, b.direction, 0.0}, opts);
  GridScan scan;
  for (long k = 0; k <= k_max; ++k) {
    const double t = k * dt;
    if (k > 0) {
      const bool esc_a = ia.advance_to(t) == GeodesicIntegrator::Status::escaped;
      const bool esc_b = ib.advance_to(t) == GeodesicIntegrator::Status::escaped;
      if (esc_a || esc_b) {
        scan.escaped = true;
        break;
      }
    }
    const double d = phase_distance(surface, metric, ia.state().tangent(), ib.state().tangent());
    scan.max_distance = std::max(scan.max_distance, d);
    if (d >= stop_at) {
      scan.first_exceed = SeparationSample{t, d};
      break;
    }
  }
  return scan;
}

/// Move the base of `a` by chart g-length r in frame direction alpha and
/// turn its direction by beta (measured in orthonormal frames).
inline UnitTangent perturb(const Surface& surface, UnitTangent a, double r, double alpha, double beta) {
  if (auto better = surface.model().better_chart(a.base)) a = to_chart(surface, a, *better);
  const Mat2 frame = orthonormal_frame(metric_at(surface, a.base));
  const Vec2 e = std::cos(alpha) * frame.col(0) + std::sin(alpha) * frame.col(1);
  const Vec2 comps = frame.inverse() * a.direction;
  const double angle = std::atan2(comps(1), comps(0)) + beta;
  const ChartPoint q = surface.normalize(ChartPoint::from(a.base.coords() + r * e, a.base.chart));
  return unit_tangent_at_angle(surface, q, angle);
}

/// A point at phase distance below delta from `a`, drawn at random and
/// shrunk by halves until it qualifies.
inline UnitTangent perturb_within(const Surface& surface, const UnitTangent& a, double delta, PhaseMetric metric,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double size = delta * (0.2 + 0.7 * unit(rng));
  const double split = unit(rng);
  const double alpha = two_pi * unit(rng);
  const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  double r = size * split, beta = sign * size * (1.0 - split);
  for (int i = 0; i < 80; ++i) {
    const UnitTangent b = perturb(surface, a, r, alpha, beta);
    const double d = phase_distance(surface, metric, a, b);
    if (d < delta && d > 0.0) return b;
    r *= 0.5;
    beta *= 0.5;
  }
  throw NumericalError("analysis", "could not place a perturbed point within delta = " + std::to_string(delta));
}

inline std::string describe_samples(const ModulusOptions& o) {
  std::ostringstream os;
  if (o.pointwise) {
    os << o.random_pairs << " perturbations of a fixed point";
  } else {
    os << o.random_pairs << " random pairs";
    if (!o.anchors.empty()) os << " + " << o.pairs_per_anchor << " perturbations of each of " << o.anchors.size() << " anchors";
  }
  os << " per level; " << o.levels << " levels; time step " << o.time_step << "; metric " << to_string(o.metric)
     << "; seed " << o.seed;
  return os.str();
}

}  // namespace detail

/// ε-δ equicontinuity estimate over a geometric δ ladder.
///
/// Each level samples pairs closer than δ and records the largest
/// separation over t in [0, t_max]; a level stops at its first violation.
/// The scan stops at the first level without a violation; the verdict is
/// satisfied if that level stays below near_miss * ε, violated if every
/// level had a violation (witness from the smallest δ, closer than every
/// tested δ), and inconclusive otherwise.
inline ModulusReport equicontinuity_modulus(const Surface& surface, const ModulusOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw PreconditionError("analysis", "epsilon must be positive");
  if (!(opts.t_max > 0.0)) throw PreconditionError("analysis", "t_max must be positive");
  if (!(opts.time_step > 0.0)) throw PreconditionError("analysis", "time_step must be positive");
  if (opts.levels < 1) throw PreconditionError("analysis", "need at least one ladder level");
  if (opts.random_pairs < 0 || opts.pairs_per_anchor < 0) throw PreconditionError("analysis", "pair counts must be >= 0");
  if (opts.metric == PhaseMetric::d1 && !surface.cartesian_plane())
    throw PreconditionError("analysis", "d1 modulus requires a Cartesian plane scenario");
  ModulusReport report;
  report.epsilon = opts.epsilon;
  report.t_max = opts.t_max;
  report.samples = detail::describe_samples(opts);
  std::mt19937_64 rng(opts.seed);
  const long k_max = static_cast<long>(std::floor(opts.t_max / opts.time_step + 1e-9));
  bool stopped_clean = false;
  for (int level = 1; level <= opts.levels; ++level) {
    LevelResult lr;
    lr.delta = opts.epsilon / std::ldexp(1.0, level);
    std::vector<std::pair<UnitTangent, UnitTangent>> pairs;
    for (int i = 0; i < opts.random_pairs; ++i) {
      const UnitTangent a = opts.pointwise ? *opts.pointwise : surface.model().sample(rng);
      pairs.emplace_back(a, detail::perturb_within(surface, a, lr.delta, opts.metric, rng));
    }
    for (const auto& anchor : opts.anchors)
      for (int i = 0; i < opts.pairs_per_anchor; ++i)
        pairs.emplace_back(anchor, detail::perturb_within(surface, anchor, lr.delta, opts.metric, rng));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [a, b] = pairs[i];
      detail::GridScan scan;
      try {
        scan = detail::separation_on_grid(surface, a, b, opts.time_step, k_max, opts.metric, opts.tol, opts.epsilon);
      } catch (const Error& e) {
        throw NumericalError("analysis", "pair " + std::to_string(i) + " at delta " + std::to_string(lr.delta) +
                                             ": " + e.what());
      }
      ++lr.pairs_tested;
      if (scan.escaped) ++lr.escaped;
      lr.max_separation = std::max(lr.max_separation, scan.max_distance);
      if (scan.first_exceed) {
        lr.outcome = LevelOutcome::violated;
        lr.witness = PairWitness{a, b, phase_distance(surface, opts.metric, a, b), scan.first_exceed->t,
                                 scan.first_exceed->distance};
        break;
      }
    }
    if (lr.outcome != LevelOutcome::violated && lr.max_separation >= opts.near_miss * opts.epsilon)
      lr.outcome = LevelOutcome::near_miss;
    report.levels.push_back(lr);
    if (lr.outcome != LevelOutcome::violated) {
      stopped_clean = true;
      if (lr.outcome == LevelOutcome::clean) {
        report.verdict = Verdict::satisfied;
        report.delta = lr.delta;
      } else {
        report.verdict = Verdict::inconclusive;
      }
      break;
    }
  }
  if (!stopped_clean) {
    report.verdict = Verdict::violated;
    report.witness = report.levels.back().witness;
  }
  return report;
}

/// Re-measure a witness over [0, t_max] on the same time grid. Longer
/// horizons only add samples, so a violation stays a violation.
inline std::optional<SeparationSample> replay_witness(const Surface& surface, const PairWitness& w, double epsilon,
                                                      double t_max, const ModulusOptions& opts) {
  const long k_max = static_cast<long>(std::floor(t_max / opts.time_step + 1e-9));
  return detail::separation_on_grid(surface, w.a, w.b, opts.time_step, k_max, opts.metric, opts.tol, epsilon)
      .first_exceed;
}

// ---------------------------------------------------------------------------
// maps on the compactified annulus

/// (s, θ) ↦ (s + θ mod 1, θ) on [0, 1) x (0, 1) with both poles fixed.
class TwistMap {
 public:
  double length() const { return 1.0; }

  CompactifiedPoint operator()(const CompactifiedPoint& p) const {
    if (p.is_pole()) return p;
    double s = std::fmod(p.coord.s + p.coord.theta, 1.0);
    if (s < 0) s += 1.0;
    return CompactifiedPoint::interior({s, p.coord.theta});
  }

  double distance(const CompactifiedPoint& a, const CompactifiedPoint& b) const {
    return compactified_distance(a, b, 1.0);
  }
};

/// Identity on the compactified annulus of circumference `length`.
class IdentityMap {
 public:
  explicit IdentityMap(double length = 1.0) : length_(length) {}
  double length() const { return length_; }
  CompactifiedPoint operator()(const CompactifiedPoint& p) const { return p; }
  double distance(const CompactifiedPoint& a, const CompactifiedPoint& b) const {
    return compactified_distance(a, b, length_);
  }

 private:
  double length_;
};

/// k-fold iterate of a map.
template <class Map>
class PowerMap {
 public:
  PowerMap(Map map, int k) : map_(std::move(map)), k_(k) {
    if (k < 1) throw PreconditionError("analysis", "map power must be at least 1");
  }
  double length() const { return map_.length(); }
  CompactifiedPoint operator()(CompactifiedPoint p) const {
    for (int i = 0; i < k_; ++i) p = map_(p);
    return p;
  }
  double distance(const CompactifiedPoint& a, const CompactifiedPoint& b) const { return map_.distance(a, b); }

 private:
  Map map_;
  int k_;
};

/// n_s x n_theta interior grid, θ_j = (j + 1/2) / n_theta, plus optional
/// rings at the given θ values and the two poles.
inline std::vector<CompactifiedPoint> annulus_samples(double length, int n_s, int n_theta,
                                                      const std::vector<double>& rings = {},
                                                      bool with_poles = true) {
  std::vector<CompactifiedPoint> out;
  for (int i = 0; i < n_s; ++i)
    for (int j = 0; j < n_theta; ++j)
      out.push_back(CompactifiedPoint::interior({length * i / n_s, (j + 0.5) / n_theta}));
  for (double th : rings)
    for (int i = 0; i < n_s; ++i) out.push_back(CompactifiedPoint::interior({length * i / n_s, th}));
  if (with_poles) {
    out.push_back(CompactifiedPoint::minus_infinity());
    out.push_back(CompactifiedPoint::plus_infinity());
  }
  return out;
}

struct RecurrenceProfile {
  /// (n, sup over C of d(F^n x, x)) for n = 1..N_max.
  std::vector<std::pair<int, double>> sup_displacements;
  /// n_k with sup < near_return_tol, and s_k.
  std::vector<int> near_returns;
  std::vector<double> near_values;
  double near_return_tol = 0.0;
  /// Sample set C (points that survived the whole orbit).
  std::vector<CompactifiedPoint> samples;
  /// orbits[i][n] = F^n(samples[i]), n = 0..N_max.
  std::vector<std::vector<CompactifiedPoint>> orbits;
  std::string sample_description;
  /// Points dropped because an iterate failed (tangency guard, horizon).
  std::vector<std::string> excluded;
};

template <class Map>
RecurrenceProfile recurrence_profile(const Map& map, int n_max, const std::vector<CompactifiedPoint>& samples,
                                     double near_return_tol, std::string description = {}) {
  if (n_max < 1) throw PreconditionError("analysis", "N_max must be at least 1");
  if (samples.empty()) throw PreconditionError("analysis", "recurrence sample set is empty");
  RecurrenceProfile prof;
  prof.near_return_tol = near_return_tol;
  prof.sample_description = description.empty() ? std::to_string(samples.size()) + " points" : std::move(description);
  for (const auto& x : samples) {
    std::vector<CompactifiedPoint> orbit{x};
    try {
      for (int n = 1; n <= n_max; ++n) orbit.push_back(map(orbit.back()));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "(s, theta) = (" << x.coord.s << ", " << x.coord.theta << ") after " << orbit.size() - 1
         << " iterates: " << e.what();
      prof.excluded.push_back(os.str());
      continue;
    }
    prof.samples.push_back(x);
    prof.orbits.push_back(std::move(orbit));
  }
  if (prof.samples.empty()) throw PreconditionError("analysis", "every sample point was excluded");
  for (int n = 1; n <= n_max; ++n) {
    double sup = 0.0;
    for (const auto& orbit : prof.orbits) sup = std::max(sup, map.distance(orbit[n], orbit[0]));
    prof.sup_displacements.emplace_back(n, sup);
    if (sup < near_return_tol) {
      prof.near_returns.push_back(n);
      prof.near_values.push_back(sup);
    }
  }
  return prof;
}

struct PowerRecurrenceEntry {
  int n_k = 0;
  double s_k = 0.0;
  double bound = 0.0;
  double measured = 0.0;
  bool ok = false;
};

struct PowerRecurrenceReport {
  int m = 1;
  double slack = 1e-9;
  std::vector<PowerRecurrenceEntry> entries;
  bool passed = false;
};

/// Checks sup_C d(F^(m n_k) x, x) <= m s_k + slack for every near return,
/// continuing the stored orbits as far as needed.
template <class Map>
PowerRecurrenceReport power_recurrence_check(const Map& map, const RecurrenceProfile& profile, int m,
                                             double slack = 1e-9) {
  if (m < 1) throw PreconditionError("analysis", "m must be at least 1");
  if (profile.near_returns.empty()) throw PreconditionError("analysis", "profile has no near returns");
  PowerRecurrenceReport rep;
  rep.m = m;
  rep.slack = slack;
  const int need = m * profile.near_returns.back();
  std::vector<std::vector<CompactifiedPoint>> orbits = profile.orbits;
  for (auto& orbit : orbits)
    while (static_cast<int>(orbit.size()) <= need) orbit.push_back(map(orbit.back()));
  rep.passed = true;
  for (std::size_t k = 0; k < profile.near_returns.size(); ++k) {
    PowerRecurrenceEntry e;
    e.n_k = profile.near_returns[k];
    e.s_k = profile.near_values[k];
    e.bound = m * e.s_k + slack;
    for (const auto& orbit : orbits) e.measured = std::max(e.measured, map.distance(orbit[m * e.n_k], orbit[0]));
    e.ok = e.measured <= e.bound;
    rep.passed = rep.passed && e.ok;
    rep.entries.push_back(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// distality

struct DistalityEntry {
  UnitTangent a;
  UnitTangent b;
  /// Smallest sampled separation: an upper bound on the true infimum.
  double inf_estimate = 0.0;
  double time = 0.0;
};

/// min over t in [-t_max, t_max] (n_samples equally spaced) of the phase
/// distance between Φ_t(a) and Φ_t(b).
inline std::vector<DistalityEntry> distality_bound(const Surface& surface,
                                                   const std::vector<std::pair<UnitTangent, UnitTangent>>& pairs,
                                                   double t_max, int n_samples,
                                                   PhaseMetric metric = PhaseMetric::sasaki, double tol = 1e-9) {
  if (!(t_max > 0.0)) throw PreconditionError("analysis", "t_max must be positive");
  if (n_samples < 3) throw PreconditionError("analysis", "distality needs at least 3 samples");
  const int half = (n_samples - 1) / 2;
  std::vector<DistalityEntry> out;
  for (const auto& [a, b] : pairs) {
    DistalityEntry e{a, b, std::numeric_limits<double>::infinity(), 0.0};
    for (double sign : {1.0, -1.0}) {
      const auto samples = detail::separation_scan(surface, a, b, sign * t_max, metric, half + 1, tol);
      for (const auto& s : samples) {
        if (s.distance < e.inf_estimate) {
          e.inf_estimate = s.distance;
          e.time = s.t;
        }
      }
    }
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// almost periods

struct AlmostPeriodWindow {
  double lo = 0.0;
  double hi = 0.0;
  /// Best time found in the window and its sup displacement.
  double t = 0.0;
  double value = 0.0;
  bool found = false;
};

struct AlmostPeriodReport {
  double epsilon = 0.0;
  double tau = 0.0;
  std::vector<AlmostPeriodWindow> windows;
  /// Times with sup displacement < ε (one per successful window).
  std::vector<double> found;
  bool every_window = false;
};

/// Searches each full window [t0 + kτ, t0 + (k+1)τ] of t_range for a t with
/// sup_x d̃(Φ_t x, x) < ε over the sample points: a grid scan with step
/// `grid_step` followed by golden-section refinement around the best
/// grid point.
inline AlmostPeriodReport almost_period_search(const Surface& surface, double epsilon, double tau,
                                               const std::vector<UnitTangent>& samples, double t0, double t1,
                                               double grid_step = 0.02, double tol = 1e-10) {
  if (!(epsilon > 0.0) || !(tau > 0.0)) throw PreconditionError("analysis", "epsilon and tau must be positive");
  if (!(t1 > t0)) throw PreconditionError("analysis", "t_range must be a nonempty interval");
  if (samples.empty()) throw PreconditionError("analysis", "almost-period search needs sample points");
  const long n_grid = static_cast<long>(std::ceil((t1 - t0) / grid_step));
  std::vector<double> times(n_grid + 1);
  for (long k = 0; k <= n_grid; ++k) times[k] = std::min(t1, t0 + k * grid_step);
  // states[i][k] = Φ_{times[k]}(x_i)
  std::vector<std::vector<FlowState>> states(samples.size());
  std::vector<double> sup(times.size(), 0.0);
  IntegratorOptions io;
  io.tol = tol;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const UnitTangent& x = samples[i];
    GeodesicIntegrator integ(surface, {x.base, x.direction, 0.0}, io);
    if (t0 != 0.0) integ.advance_to(t0);
    states[i].reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      integ.advance_to(times[k]);
      states[i].push_back(integ.state());
      sup[k] = std::max(sup[k], sasaki_distance(surface, integ.state().tangent(), x));
    }
  }
  auto sup_at = [&](double t, std::size_t k_ref) {
    double v = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const FlowState& s = states[i][k_ref];
      const UnitTangent y = geodesic_flow(surface, s.tangent(), t - s.time, tol);
      v = std::max(v, sasaki_distance(surface, y, samples[i]));
    }
    return v;
  };
  AlmostPeriodReport rep;
  rep.epsilon = epsilon;
  rep.tau = tau;
  rep.every_window = true;
  for (int w = 0;; ++w) {
    AlmostPeriodWindow win;
    win.lo = t0 + w * tau;
    win.hi = win.lo + tau;
    if (win.hi > t1 + 1e-12) break;
    std::size_t best = times.size();
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < win.lo - 1e-12 || times[k] > win.hi + 1e-12) continue;
      if (best == times.size() || sup[k] < sup[best]) best = k;
    }
    win.t = times[best];
    win.value = sup[best];
    if (win.value >= epsilon) {
      // golden section on [t_best - h, t_best + h] clipped to the window
      double a = std::max(win.lo, times[best] - grid_step), b = std::min(win.hi, times[best] + grid_step);
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = sup_at(c, best), fd = sup_at(d, best);
      for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = sup_at(c, best);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = sup_at(d, best);
        }
      }
      const double tm = fc < fd ? c : d, fm = std::min(fc, fd);
      if (fm < win.value) {
        win.t = tm;
        win.value = fm;
      }
    }
    win.found = win.value < epsilon;
    if (win.found) rep.found.push_back(win.t);
    rep.every_window = rep.every_window && win.found;
    rep.windows.push_back(win);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// closed geodesics

struct ShootingOptions {
  double period_min = 1.0;
  double period_max = 10.0;
  /// Accept when d̃(Φ_T v, v) < tol.
  double tol = 1e-6;
  double integrator_tol = 1e-11;
  double scan_step = 0.01;
  int max_sweeps = 200;
  double dedup_distance = 1e-3;
  int max_halvings = 10;
};

struct SeedReport {
  std::size_t seed_index = 0;
  bool converged = false;
  double residual = 0.0;
  double period = 0.0;
  std::string note;
};

struct ClosedGeodesicSearch {
  std::vector<ClosedGeodesic> geodesics;
  std::vector<SeedReport> seeds;
};

namespace detail {

/// Smooth closing residual: ambient position and ambient direction
/// differences (covering-plane representative on the torus).
inline double closing_energy(const Surface& surface, const UnitTangent& v, double period, double tol) {
  const UnitTangent w = geodesic_flow(surface, v, period, tol);
  const auto& model = surface.model();
  Vec3 dp = model.ambient(w.base) - model.ambient(v.base);
  if (const auto* torus = dynamic_cast<const FlatTorusModel*>(&model)) {
    const Vec2 d = torus->wrapped_delta(v.base, w.base);
    dp = Vec3(d(0), d(1), 0.0);
  }
  const Vec3 dv = model.ambient_jacobian(w.base) * w.direction - model.ambient_jacobian(v.base) * v.direction;
  return dp.squaredNorm() + dv.squaredNorm();
}

/// Hausdorff distance between two sampled base curves, measured from the
/// samples of each curve to the chord polyline of the other.
inline double hausdorff(const Surface& surface, const ClosedGeodesic& a, const ClosedGeodesic& b, std::size_t stride) {
  const auto& model = surface.model();
  const auto* torus = dynamic_cast<const FlatTorusModel*>(&model);
  auto pts = [&](const ClosedGeodesic& g) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < g.states.size(); i += stride) out.push_back(model.ambient(g.states[i].base));
    return out;
  };
  const auto pa = pts(a), pb = pts(b);
  auto lift = [&](const Vec3& from, const Vec3& to) {
    if (!torus) return Vec3(to - from);
    return Vec3(std::remainder(to.x() - from.x(), torus->period_u()), std::remainder(to.y() - from.y(), torus->period_v()),
                0.0);
  };
  auto directed = [&](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < y.size(); ++j) {
        const Vec3 q0 = lift(p, y[j]);
        const Vec3 q1 = q0 + lift(y[j], y[(j + 1) % y.size()]);
        const Vec3 seg = q1 - q0;
        const double w = std::clamp(-q0.dot(seg) / std::max(seg.squaredNorm(), 1e-300), 0.0, 1.0);
        best = std::min(best, (q0 + w * seg).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

}  // namespace detail

/// Two seeds on each coordinate plane of a sphere-family surface: the
/// equator {z = 0} and the meridians {y = 0} and {x = 0}.
inline std::vector<UnitTangent> coordinate_plane_seeds(const Surface& surface) {
  if (!dynamic_cast<const SphereFamilyModel*>(&surface.model()))
    throw PreconditionError("analysis", "coordinate-plane seeds need a sphere-family surface");
  return {make_unit_tangent(surface, {pi / 2, 0.3, 0}, Vec2(0, 1)),
          make_unit_tangent(surface, {pi / 2, 2.0, 0}, Vec2(0, 1)),
          make_unit_tangent(surface, {1.0, 0.0, 0}, Vec2(1, 0)),
          make_unit_tangent(surface, {2.0, pi, 0}, Vec2(1, 0)),
          make_unit_tangent(surface, {1.0, pi / 2, 0}, Vec2(1, 0)),
          make_unit_tangent(surface, {2.2, 3 * pi / 2, 0}, Vec2(1, 0))};
}

/// Shooting for closed geodesics. Per seed: scan T over the period range
/// for the first local minimum of d̃(Φ_T v, v) below 0.05 (else the global
/// minimum), then coordinate descent on (u, v, heading, T) of a smooth
/// closing energy with numerically estimated first and second
/// derivatives. Accepted orbits are reduced to their smallest period and
/// deduplicated by Hausdorff distance of the base curves.
inline ClosedGeodesicSearch find_closed_geodesics(const Surface& surface, const std::vector<UnitTangent>& seeds,
                                                  const ShootingOptions& opts = {}) {
  if (seeds.empty()) throw PreconditionError("analysis", "closed-geodesic search needs seeds");
  if (!(opts.period_min > 0.0 && opts.period_max > opts.period_min))
    throw PreconditionError("analysis", "period range must be positive and nonempty");
  ClosedGeodesicSearch out;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    SeedReport rep;
    rep.seed_index = si;
    try {
      UnitTangent v0 = seeds[si];
      if (auto better = surface.model().better_chart(v0.base)) v0 = to_chart(surface, v0, *better);
      v0 = make_unit_tangent(surface, v0.base, v0.direction);

      // period scan
      IntegratorOptions io;
      io.tol = opts.integrator_tol;
      GeodesicIntegrator integ(surface, {v0.base, v0.direction, 0.0}, io);
      std::vector<std::pair<double, double>> scan;
      for (double t = opts.period_min; t <= opts.period_max + 1e-12; t += opts.scan_step) {
        integ.advance_to(t);
        scan.emplace_back(t, sasaki_distance(surface, integ.state().tangent(), v0));
      }
      std::size_t pick = 0;
      for (std::size_t k = 1; k < scan.size(); ++k)
        if (scan[k].second < scan[pick].second) pick = k;
      for (std::size_t k = 1; k + 1 < scan.size(); ++k) {
        if (scan[k].second <= scan[k - 1].second && scan[k].second <= scan[k + 1].second && scan[k].second < 0.05) {
          pick = k;
          break;
        }
      }

      // coordinate descent on (u, v, heading, T)
      const Mat2 frame0 = orthonormal_frame(metric_at(surface, v0.base));
      const Vec2 comps = frame0.inverse() * v0.direction;
      double x[4] = {v0.base.u, v0.base.v, std::atan2(comps(1), comps(0)), scan[pick].first};
      const int chart = v0.base.chart;
      auto make = [&](const double* p) {
        return unit_tangent_at_angle(surface, ChartPoint{p[0], p[1], chart}, p[2]);
      };
      auto energy = [&](const double* p) {
        try {
          return detail::closing_energy(surface, make(p), p[3], opts.integrator_tol);
        } catch (const DomainError&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      double e = energy(x);
      auto residual = [&]() { return sasaki_distance(surface, geodesic_flow(surface, make(x), x[3], opts.integrator_tol), make(x)); };
      double res = residual();
      // keep polishing well below the acceptance threshold
      for (int sweep = 0; sweep < opts.max_sweeps && res >= 1e-3 * opts.tol; ++sweep) {
        for (int c = 0; c < 4; ++c) {
          const double h = 1e-6;
          double xp[4], xm[4];
          std::copy(x, x + 4, xp);
          std::copy(x, x + 4, xm);
          xp[c] += h;
          xm[c] -= h;
          const double ep = energy(xp), em = energy(xm);
          const double g = (ep - em) / (2 * h);
          const double curv = (ep - 2 * e + em) / (h * h);
          double step = curv > 0.0 ? -g / curv : -std::copysign(1e-3, g);
          step = std::clamp(step, -0.1, 0.1);
          for (int back = 0; back < 30; ++back) {
            double xt[4];
            std::copy(x, x + 4, xt);
            xt[c] += step;
            const double et = energy(xt);
            if (et < e) {
              std::copy(xt, xt + 4, x);
              e = et;
              break;
            }
            step *= 0.5;
          }
        }
        const double prev = res;
        res = residual();
        if (res < opts.tol && res > 0.5 * prev) break;
      }
      rep.residual = res;
      if (!(res < opts.tol)) {
        rep.note = "no convergence: residual " + std::to_string(res);
        out.seeds.push_back(rep);
        continue;
      }
      UnitTangent v = make(x);
      double period = x[3];
      for (int k = 0; k < opts.max_halvings; ++k) {
        const double half = sasaki_distance(surface, geodesic_flow(surface, v, 0.5 * period, opts.integrator_tol), v);
        if (!(half < opts.tol)) break;
        period *= 0.5;
      }
      v = prefer_primary(surface, v);
      ClosedGeodesic gamma = make_closed_geodesic(surface, v, period, 1024, opts.integrator_tol);
      const ClosedGeodesicCheck check = check_closed_geodesic(gamma, opts.tol, 1e-6, opts.integrator_tol);
      rep.converged = check.closed;
      rep.period = period;
      if (!check.closed) {
        rep.note = "closure re-check failed: " + std::to_string(check.closure);
        out.seeds.push_back(rep);
        continue;
      }
      bool duplicate = false;
      for (std::size_t j = 0; j < out.geodesics.size() && !duplicate; ++j) {
        if (detail::hausdorff(surface, gamma, out.geodesics[j], 2) < opts.dedup_distance) {
          duplicate = true;
          rep.note = "duplicate of geodesic " + std::to_string(j);
        }
      }
      if (!duplicate) {
        rep.note = "geodesic " + std::to_string(out.geodesics.size());
        out.geodesics.push_back(std::move(gamma));
      }
    } catch (const Error& e) {
      rep.converged = false;
      rep.note = std::string("skipped: ") + e.what();
    }
    out.seeds.push_back(rep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// fixed points

struct FixedPointCluster {
  CompactifiedPoint representative;
  std::size_t size = 0;
  double displacement = 0.0;
};

struct FixedPointCensus {
  std::size_t points = 0;
  std::size_t hits = 0;
  std::size_t excluded = 0;
  /// Displacement below tol on at least 99% of the grid: the map is
  /// numerically the identity and no count is reported.
  bool identity_like = false;
  std::vector<FixedPointCluster> clusters;
};

/// Grid over the compactified sphere: azimuths s_i = L i / n_s and polar
/// levels θ_j = j / (n_theta - 1), the two ends being the poles. Hits
/// (displacement < tol) closer than two grid spacings in the embedding
/// are merged into clusters.
template <class Map>
FixedPointCensus fixed_point_census(const Map& map, int n_s, int n_theta, double tol) {
  if (n_s < 1 || n_theta < 3) throw PreconditionError("analysis", "census grid needs n_s >= 1 and n_theta >= 3");
  const double length = map.length();
  std::vector<CompactifiedPoint> grid;
  grid.push_back(CompactifiedPoint::minus_infinity());
  for (int j = 1; j < n_theta - 1; ++j)
    for (int i = 0; i < n_s; ++i) grid.push_back(CompactifiedPoint::interior({length * i / n_s, double(j) / (n_theta - 1)}));
  grid.push_back(CompactifiedPoint::plus_infinity());

  FixedPointCensus census;
  std::vector<std::pair<CompactifiedPoint, double>> hits;
  for (const auto& p : grid) {
    CompactifiedPoint q;
    try {
      q = map(p);
    } catch (const PreconditionError&) {
      ++census.excluded;
      continue;
    }
    ++census.points;
    const double d = map.distance(p, q);
    if (d < tol) hits.emplace_back(p, d);
  }
  census.hits = hits.size();
  if (census.points > 0 && census.hits >= 0.99 * census.points) {
    census.identity_like = true;
    return census;
  }
  const double link = 2.0 * std::max(two_pi / n_s, pi / (n_theta - 1));
  std::vector<int> parent(hits.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int i) { return parent[i] == i ? i : parent[i] = root(parent[i]); };
  for (std::size_t i = 0; i < hits.size(); ++i)
    for (std::size_t j = i + 1; j < hits.size(); ++j)
      if (compactified_distance(hits[i].first, hits[j].first, length) < link) parent[root(i)] = root(j);
  std::vector<int> index(hits.size(), -1);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const int r = root(i);
    if (index[r] < 0) {
      index[r] = static_cast<int>(census.clusters.size());
      census.clusters.push_back({hits[i].first, 0, hits[i].second});
    }
    auto& c = census.clusters[index[r]];
    ++c.size;
    if (hits[i].second < c.displacement || (hits[i].first.is_pole() && !c.representative.is_pole())) {
      c.representative = hits[i].first;
      c.displacement = hits[i].second;
    }
  }
  return census;
}

}  // namespace geoflow
