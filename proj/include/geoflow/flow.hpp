#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <tuple>
#include <vector>

#include "geoflow/geometry.hpp"

namespace geoflow {

/// A point of the flow: base point, chart velocity and arc-length time.
struct FlowState {
  ChartPoint base;
  Vec2 velocity = Vec2::Zero();
  double time = 0.0;

  UnitTangent tangent() const { return {base, velocity}; }
};

struct IntegratorOptions {
  double tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 1e-2;
};

/// Dormand-Prince 5(4) integration of the geodesic equation
///   u'' + Γ(u', u') = 0
/// on (base, velocity), with embedded error control, chart switching on
/// the sphere family and periodic wrapping after every accepted step.
class GeodesicIntegrator {
 public:
  enum class Status { ok, escaped };

  GeodesicIntegrator(const Surface& surface, const FlowState& start, IntegratorOptions opts = {})
      : surface_(surface), model_(&surface.model()), opts_(opts), state_(start) {
    if (!(opts_.tol > 0.0)) throw PreconditionError("flow", "integrator tolerance must be positive");
    state_.base = surface_.normalize(state_.base);
    rechart();
    h_ = opts_.initial_step;
  }

  const FlowState& state() const { return state_; }
  std::size_t steps() const { return steps_; }
  bool escaped() const { return escaped_; }

  /// Advance to `target`, calling on_step(previous, current) after every
  /// accepted step. Stops early if the orbit escapes a noncompact chart.
  template <class OnStep>
  Status advance_to(double target, OnStep&& on_step) {
    if (escaped_) return Status::escaped;
    const double direction = target >= state_.time ? 1.0 : -1.0;
    while (state_.time != target) {
      const double remaining = target - state_.time;
      double h = direction * std::min({std::abs(h_), opts_.max_step, std::abs(remaining)});
      const bool last = std::abs(h) >= std::abs(remaining);
      if (last) h = remaining;
      const Trial trial = attempt(state_, h);
      const double factor = std::clamp(0.9 * std::pow(std::max(trial.error, 1e-300), -0.2), 0.2, 5.0);
      if (trial.error <= 1.0) {
        const FlowState previous = state_;
        state_ = trial.state;
        if (last) state_.time = target;
        ++steps_;
        if (!last || std::abs(h) >= 0.5 * std::abs(h_)) h_ = std::abs(h) * factor;
        if (model_->escaped(state_.base)) {
          escaped_ = true;
          on_step(previous, state_);
          return Status::escaped;
        }
        state_.base = surface_.normalize(state_.base);
        rechart();
        on_step(previous, state_);
      } else {
        h_ = std::abs(h) * factor;
        if (h_ < 1e-14 * std::max(1.0, std::abs(state_.time))) {
          throw StiffnessError("flow", "step size underflow at t = " + std::to_string(state_.time) + ", " +
                                           detail::describe(state_.base));
        }
      }
    }
    return Status::ok;
  }

  Status advance_to(double target) {
    return advance_to(target, [](const FlowState&, const FlowState&) {});
  }

  /// One Dormand-Prince step of size h from `s` without error control.
  /// Used to refine events inside an accepted step.
  FlowState step_from(const FlowState& s, double h) const {
    FlowState out = attempt(s, h).state;
    out.time = s.time + h;
    if (!model_->escaped(out.base)) out.base = surface_.normalize(out.base);
    return out;
  }

 private:
  using Vec4 = Eigen::Vector4d;

  struct Trial {
    FlowState state;
    double error;
  };

  Vec4 rhs(const Vec4& y, int chart) const {
    const ChartPoint p{y(0), y(1), chart};
    const MetricJet jet = model_->jet(p);
    detail::require_positive_definite(jet.g, p);
    const Vec2 vel(y(2), y(3));
    const Vec2 acc = -contract(detail::christoffel_from_jet(jet), vel, vel);
    return {y(2), y(3), acc(0), acc(1)};
  }

  Trial attempt(const FlowState& s, double h) const {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    const int chart = s.base.chart;
    const Vec4 y(s.base.u, s.base.v, s.velocity(0), s.velocity(1));
    const Vec4 k1 = rhs(y, chart);
    // An oversized trial step can put a stage point where the metric
    // degenerates (far outside a noncompact chart); reject it and shrink.
    try {
      const Vec4 k2 = rhs(y + h * a21 * k1, chart);
      const Vec4 k3 = rhs(y + h * (a31 * k1 + a32 * k2), chart);
      const Vec4 k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3), chart);
      const Vec4 k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), chart);
      const Vec4 k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), chart);
      const Vec4 y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec4 k7 = rhs(y5, chart);
      const Vec4 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double norm = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double scale = opts_.tol * (1.0 + std::max(std::abs(y(i)), std::abs(y5(i))));
        norm = std::max(norm, std::abs(err(i)) / scale);
      }
      if (!std::isfinite(norm)) norm = 1e10;
      return {{{y5(0), y5(1), chart}, {y5(2), y5(3)}, s.time + h}, norm};
    } catch (const NumericalError&) {
      return {s, 1e10};
    }
  }

  void rechart() {
    if (auto better = model_->better_chart(state_.base)) {
      auto [p, w] = change_chart(*model_, state_.base, state_.velocity, *better);
      state_.base = p;
      state_.velocity = w;
    }
  }

  const Surface& surface_;
  const MetricModel* model_;
  IntegratorOptions opts_;
  FlowState state_;
  double h_ = 1e-2;
  std::size_t steps_ = 0;
  bool escaped_ = false;
};

inline double speed_drift(const Surface& surface, const FlowState& s) {
  return std::abs(g_norm(surface, s.base, s.velocity) - 1.0);
}

struct FlowResult {
  UnitTangent state;
  double time = 0.0;
  bool escaped = false;
  int renormalizations = 0;
  /// |g-norm - 1| before any renormalization.
  double drift = 0.0;
  std::size_t steps = 0;
};

namespace detail {

inline UnitTangent finish_output(const Surface& surface, const FlowState& s, int& renormalizations, double& drift) {
  UnitTangent out = prefer_primary(surface, s.tangent());
  const double n = g_norm(surface, out.base, out.direction);
  drift = std::abs(n - 1.0);
  if (drift > 1e-10) {
    out.direction /= n;
    ++renormalizations;
  }
  return out;
}

}  // namespace detail

/// Flow v for time t (either sign). Escapes from a noncompact chart are
/// reported in the result, not thrown.
inline FlowResult integrate_flow(const Surface& surface, const UnitTangent& v, double t, IntegratorOptions opts) {
  if (!(opts.tol > 0.0)) throw PreconditionError("flow", "tol must be positive");
  GeodesicIntegrator integ(surface, {v.base, v.direction, 0.0}, opts);
  FlowResult result;
  result.escaped = integ.advance_to(t) == GeodesicIntegrator::Status::escaped;
  result.time = integ.state().time;
  result.steps = integ.steps();
  if (result.escaped) {
    result.state = integ.state().tangent();
    result.drift = std::abs(g_inner(surface.model().metric(result.state.base), result.state.direction,
                                    result.state.direction) - 1.0);
    return result;
  }
  result.state = detail::finish_output(surface, integ.state(), result.renormalizations, result.drift);
  return result;
}

inline FlowResult integrate_flow(const Surface& surface, const UnitTangent& v, double t, double tol = 1e-9) {
  IntegratorOptions opts;
  opts.tol = tol;
  return integrate_flow(surface, v, t, opts);
}

/// Φ_t(v).
inline UnitTangent geodesic_flow(const Surface& surface, const UnitTangent& v, double t, double tol = 1e-9) {
  return integrate_flow(surface, v, t, tol).state;
}

struct TrajectoryDiagnostics {
  double max_speed_drift = 0.0;
  std::optional<double> max_clairaut_drift;
  int renormalizations = 0;
  bool escaped = false;
};

struct Trajectory {
  std::vector<FlowState> states;
  TrajectoryDiagnostics diagnostics;
};

/// Samples of the orbit of v at n_samples equally spaced times in [0, t_end].
inline Trajectory integrate_trajectory(const Surface& surface, const UnitTangent& v, double t_end, int n_samples,
                                       double tol = 1e-9) {
  if (!(t_end > 0.0)) throw PreconditionError("flow", "trajectory horizon must be positive");
  if (n_samples < 2) throw PreconditionError("flow", "trajectory needs at least two samples");
  IntegratorOptions opts;
  opts.tol = tol;
  GeodesicIntegrator integ(surface, {v.base, v.direction, 0.0}, opts);
  Trajectory traj;
  const auto& model = surface.model();
  const auto c0 = model.clairaut(v.base, v.direction);
  if (c0) traj.diagnostics.max_clairaut_drift = 0.0;
  auto record = [&](const FlowState& s) {
    int renorm = 0;
    double drift = 0.0;
    const UnitTangent out = detail::finish_output(surface, s, renorm, drift);
    traj.diagnostics.renormalizations += renorm;
    traj.diagnostics.max_speed_drift = std::max(traj.diagnostics.max_speed_drift, drift);
    if (c0) {
      const double c = *model.clairaut(s.base, s.velocity);
      traj.diagnostics.max_clairaut_drift = std::max(*traj.diagnostics.max_clairaut_drift, std::abs(c - *c0));
    }
    traj.states.push_back({out.base, out.direction, s.time});
  };
  record(integ.state());
  for (int i = 1; i < n_samples; ++i) {
    const double t = t_end * i / (n_samples - 1);
    if (integ.advance_to(t) == GeodesicIntegrator::Status::escaped) {
      traj.diagnostics.escaped = true;
      break;
    }
    record(integ.state());
  }
  return traj;
}

/// CSV with columns t,u,v,du,dv,drift.
inline void write_trajectory_csv(std::ostream& os, const Surface& surface, const Trajectory& traj) {
  os << "t,u,v,du,dv,drift\n";
  os.precision(17);
  for (const auto& s : traj.states) {
    os << s.time << ',' << s.base.u << ',' << s.base.v << ',' << s.velocity(0) << ',' << s.velocity(1) << ','
       << speed_drift(surface, s) << '\n';
  }
}

/// Sasaki-equivalent distance: base distance plus the angle between b's
/// direction and a's direction transported to b's base along a minimal
/// path. Evaluated in a canonical argument order so it is exactly symmetric.
inline double sasaki_distance(const Surface& surface, const UnitTangent& a, const UnitTangent& b) {
  const auto& model = surface.model();
  const Vec3 pa = model.ambient(a.base), pb = model.ambient(b.base);
  const Vec3 da = model.ambient_jacobian(a.base) * a.direction;
  const Vec3 db = model.ambient_jacobian(b.base) * b.direction;
  auto key = [](const Vec3& p, const Vec3& d) { return std::make_tuple(p.x(), p.y(), p.z(), d.x(), d.y(), d.z()); };
  const bool swap = key(pb, db) < key(pa, da);
  const UnitTangent& first = swap ? b : a;
  const UnitTangent& second = swap ? a : b;
  const double base = model.distance(first.base, second.base).value;
  const Vec2 moved = model.transport(first.base, first.direction, second.base);
  return base + g_angle(model.metric(second.base), moved, second.direction);
}

/// d1((x, v), (y, w)) = |x - y| + |v - w| in Cartesian chart components.
inline double d1_distance(const Surface& surface, const UnitTangent& a, const UnitTangent& b) {
  if (!surface.cartesian_plane()) {
    throw PreconditionError("flow", "d1 distance requires a plane scenario with a Cartesian chart, got " +
                                        surface.name());
  }
  return (a.base.coords() - b.base.coords()).norm() + (a.direction - b.direction).norm();
}

enum class PhaseMetric { sasaki, d1 };

inline const char* to_string(PhaseMetric m) { return m == PhaseMetric::sasaki ? "sasaki" : "d1"; }

inline double phase_distance(const Surface& surface, PhaseMetric metric, const UnitTangent& a, const UnitTangent& b) {
  return metric == PhaseMetric::sasaki ? sasaki_distance(surface, a, b) : d1_distance(surface, a, b);
}

struct SeparationSample {
  double t;
  double distance;
};

namespace detail {

/// Distance between Φ_t(a) and Φ_t(b) at n equally spaced times from 0 to
/// `horizon` (either sign). Stops after the first sample at or above
/// `stop_at`, or when either orbit escapes.
inline std::vector<SeparationSample> separation_scan(const Surface& surface, const UnitTangent& a,
                                                     const UnitTangent& b, double horizon, PhaseMetric metric,
                                                     int n_samples, double tol,
                                                     double stop_at = std::numeric_limits<double>::infinity()) {
  IntegratorOptions opts;
  opts.tol = tol;
  GeodesicIntegrator ia(surface, {a.base, a.direction, 0.0}, opts);
  GeodesicIntegrator ib(surface, {b.base, b.direction, 0.0}, opts);
  std::vector<SeparationSample> out;
  out.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = horizon * i / (n_samples - 1);
    if (i > 0) {
      const bool esc_a = ia.advance_to(t) == GeodesicIntegrator::Status::escaped;
      const bool esc_b = ib.advance_to(t) == GeodesicIntegrator::Status::escaped;
      if (esc_a || esc_b) break;
    }
    const double d = phase_distance(surface, metric, ia.state().tangent(), ib.state().tangent());
    out.push_back({t, d});
    if (d >= stop_at) break;
  }
  return out;
}

}  // namespace detail

inline std::vector<SeparationSample> flow_pair_separation(const Surface& surface, const UnitTangent& a,
                                                          const UnitTangent& b, double t_max, PhaseMetric metric,
                                                          int n_samples, double tol = 1e-9) {
  if (!(t_max > 0.0)) throw PreconditionError("flow", "t_max must be positive");
  if (n_samples < 2) throw PreconditionError("flow", "n_samples must be at least 2");
  return detail::separation_scan(surface, a, b, t_max, metric, n_samples, tol);
}

}  // namespace geoflow
