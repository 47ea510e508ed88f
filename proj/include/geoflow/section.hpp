#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/models.hpp"

namespace geoflow {

/// A periodic orbit with dense samples of one period.
struct ClosedGeodesic {
  Surface surface;
  UnitTangent initial;
  /// Arc length of one traversal.
  double period = 0.0;
  /// Samples at times period * i / n for i in [0, n).
  std::vector<FlowState> states;
};

inline ClosedGeodesic make_closed_geodesic(const Surface& surface, const UnitTangent& v0, double period,
                                           int n_samples = 2048, double tol = 1e-10) {
  if (!(period > 0.0)) throw PreconditionError("section", "closed geodesic period must be positive");
  if (n_samples < 16) throw PreconditionError("section", "closed geodesic needs at least 16 samples");
  IntegratorOptions opts;
  opts.tol = tol;
  GeodesicIntegrator integ(surface, {v0.base, v0.direction, 0.0}, opts);
  ClosedGeodesic gamma{surface, v0, period, {}};
  gamma.states.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    if (i > 0) integ.advance_to(period * i / n_samples);
    const UnitTangent out = prefer_primary(surface, integ.state().tangent());
    gamma.states.push_back({out.base, out.direction, integ.state().time});
  }
  return gamma;
}

struct ClosedGeodesicCheck {
  /// d̃(Φ_L(v₀), v₀)
  double closure = 0.0;
  /// Smallest chord between samples that are not neighbours along the orbit.
  double min_separation = 0.0;
  bool closed = false;
  bool simple = false;
};

namespace detail {

/// Chord between base points in the ambient picture of the surface
/// (covering-plane shortest representative on the torus).
inline double ambient_chord(const MetricModel& model, const Vec3& a, const Vec3& b, const FlatTorusModel* torus) {
  if (torus) {
    return Vec2(std::remainder(b.x() - a.x(), torus->period_u()), std::remainder(b.y() - a.y(), torus->period_v()))
        .norm();
  }
  (void)model;
  return (a - b).norm();
}

}  // namespace detail

/// Re-integrates one period to measure closure and tests the base samples
/// for self-intersections. A pair of samples at least three indices apart
/// (cyclically) counts as a self-intersection when its chord is below
/// max(simple_tol, 0.75 h), h being the largest step between neighbours.
inline ClosedGeodesicCheck check_closed_geodesic(const ClosedGeodesic& gamma, double closure_tol = 1e-6,
                                                 double simple_tol = 1e-6, double tol = 1e-10) {
  ClosedGeodesicCheck check;
  const Surface& surface = gamma.surface;
  const auto& model = surface.model();
  check.closure = sasaki_distance(surface, geodesic_flow(surface, gamma.initial, gamma.period, tol), gamma.initial);
  check.closed = check.closure < closure_tol;

  const auto* torus = dynamic_cast<const FlatTorusModel*>(&model);
  const std::size_t n = gamma.states.size();
  std::vector<Vec3> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = model.ambient(gamma.states[i].base);
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) h = std::max(h, detail::ambient_chord(model, pts[i], pts[(i + 1) % n], torus));
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 3; j < n; ++j) {
      if (n - (j - i) < 3) continue;
      min_sep = std::min(min_sep, detail::ambient_chord(model, pts[i], pts[j], torus));
    }
  }
  check.min_separation = min_sep;
  check.simple = min_sep >= std::max(simple_tol, 0.75 * h);
  return check;
}

/// Annulus coordinates of a unit vector crossing γ: arc-length position s
/// in [0, L) and crossing angle with γ̇ divided by π.
struct SectionCoord {
  double s = 0.0;
  double theta = 0.5;
};

/// Which transversal crossings of γ count as returns.
///
/// `every_crossing` stops at the next crossing from either side and reads
/// off the unsigned angle with γ̇, which identifies a crossing into the
/// right side with its mirror image on the left. Iterates of F then follow
/// one flow orbit only when the surface is symmetric under reflection in
/// γ (the sphere equator, the principal ellipses of the ellipsoid).
///
/// `same_side` only counts crossings into the left side; F is then the
/// first-return map of the flow to that annulus.
enum class CrossingPolicy { every_crossing, same_side };

struct SectionOptions {
  double theta_guard = 0.01;
  /// Integrator tolerance.
  double tol = 1e-10;
  /// Bisection stops when the bracket is shorter than this.
  double time_tol = 1e-10;
  /// Flow time allowed per return before giving up.
  double horizon = 100.0;
  double max_step = 0.1;
  CrossingPolicy policy = CrossingPolicy::every_crossing;
};

struct Crossing {
  FlowState state;
  SectionCoord coord;
  /// +1 when the orbit crosses into the left side of γ̇, -1 otherwise.
  int side = 1;
};

/// The search for returns ran out of flow time. Carries what was found.
class HorizonError : public Error {
 public:
  HorizonError(const std::string& what, std::vector<Crossing> partial, FlowState last)
      : Error("section", what), partial_(std::move(partial)), last_(last) {}

  const std::vector<Crossing>& partial() const { return partial_; }
  const FlowState& last_state() const { return last_; }

 private:
  std::vector<Crossing> partial_;
  FlowState last_;
};

struct ReturnResult {
  SectionCoord coord;
  double time = 0.0;
  int side = 1;
  /// Output angle fell outside the guard band.
  bool tangency_warning = false;
};

/// Poincaré section along a simple closed geodesic γ.
///
/// Crossings are detected with a signed defining function f of γ, positive
/// on the left of γ̇: the height over the plane of γ when γ is planar in the
/// unit-sphere picture of the sphere family, the signed offset from the
/// parallel line family on the flat torus, and a signed distance to a
/// Hermite interpolant of γ inside a tubular strip otherwise.
class Section {
 public:
  enum class Kind { plane, line, curve };

  Section(const Surface& surface, ClosedGeodesic gamma, SectionOptions opts = {})
      : surface_(surface), gamma_(std::move(gamma)), opts_(opts) {
    if (!(opts_.theta_guard >= 0.0 && opts_.theta_guard < 0.5))
      throw ConfigError("section", "theta_guard must lie in [0, 0.5)");
    if (!(opts_.horizon > 0.0) || !(opts_.time_tol > 0.0) || !(opts_.tol > 0.0) || !(opts_.max_step > 0.0))
      throw ConfigError("section", "section tolerances and horizon must be positive");
    if (gamma_.states.size() < 16) throw PreconditionError("section", "closed geodesic has too few samples");
    if (const auto* m = dynamic_cast<const SphereFamilyModel*>(&surface_.model())) {
      sphere_ = m;
      init_sphere_family();
    } else if (const auto* t = dynamic_cast<const FlatTorusModel*>(&surface_.model())) {
      torus_ = t;
      init_torus();
    } else {
      throw PreconditionError("section", "sections need a compact catalog surface, got " + surface_.name());
    }
    max_step_ = std::min(opts_.max_step, strip_ / 3.0);
  }

  Kind kind() const { return kind_; }
  double length() const { return length_; }
  const ClosedGeodesic& geodesic() const { return gamma_; }
  const Surface& surface() const { return surface_; }
  const SectionOptions& options() const { return opts_; }

  /// Signed defining function of γ.
  double level(const ChartPoint& p) const {
    switch (kind_) {
      case Kind::plane: return sphere_->ambient(p).dot(normal_);
      case Kind::line: return std::remainder((p.coords() - line_origin_).dot(line_normal_), line_spacing_);
      case Kind::curve: return curve_projection(sphere_->ambient(p)).second;
    }
    return 0.0;
  }

  /// Chart differential of `level` at p.
  Vec2 level_gradient(const ChartPoint& p) const {
    switch (kind_) {
      case Kind::plane: return sphere_->ambient_jacobian(p).transpose() * normal_;
      case Kind::line: return line_normal_;
      case Kind::curve: {
        Vec2 grad;
        for (int k = 0; k < 2; ++k) {
          ChartPoint a = p, b = p;
          const double h = 1e-6;
          (k == 0 ? a.u : a.v) += h;
          (k == 0 ? b.u : b.v) -= h;
          grad(k) = (level(a) - level(b)) / (2.0 * h);
        }
        return grad;
      }
    }
    return Vec2::Zero();
  }

  /// Arc-length position of a point of γ, in [0, L).
  double locate(const ChartPoint& p) const {
    double s = 0.0;
    switch (kind_) {
      case Kind::plane: {
        const Vec3 n = sphere_->ambient(p);
        double psi = std::atan2(n.dot(b2_), n.dot(b1_));
        if (psi < 0) psi += two_pi;
        s = arc_from_angle(psi);
        break;
      }
      case Kind::line: {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < gamma_.states.size(); ++i) {
          const double d = torus_->wrapped_delta(gamma_.states[i].base, p).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = i;
          }
        }
        s = gamma_.states[best].time + torus_->wrapped_delta(gamma_.states[best].base, p).dot(line_tangent_);
        break;
      }
      case Kind::curve: s = curve_projection(sphere_->ambient(p)).first; break;
    }
    return wrap_s(s);
  }

  /// γ(s) with unit velocity γ̇(s).
  UnitTangent gamma_at(double s) const {
    s = wrap_s(s);
    switch (kind_) {
      case Kind::plane: {
        const double psi = angle_from_arc(s);
        const Vec3 n = std::cos(psi) * b1_ + std::sin(psi) * b2_;
        const Vec3 dn = -std::sin(psi) * b1_ + std::cos(psi) * b2_;
        const ChartPoint p = sphere_->chart_point(n);
        return make_unit_tangent(surface_, p, sphere_->from_ambient_vector(p, dn));
      }
      case Kind::line: {
        const ChartPoint p = surface_.normalize(ChartPoint::from(line_origin_ + s * line_tangent_));
        return {p, line_tangent_};
      }
      case Kind::curve: {
        const auto [c, dc, ddc] = hermite(s);
        (void)ddc;
        const Vec3 n = c.normalized();
        const ChartPoint p = sphere_->chart_point(n);
        return make_unit_tangent(surface_, p, sphere_->from_ambient_vector(p, dc - dc.dot(n) * n));
      }
    }
    return {};
  }

  /// Unit vector at γ(s) making angle πθ with γ̇, pointing to the left.
  UnitTangent to_tangent(const SectionCoord& c) const {
    const ChartPoint p = gamma_at(c.s).base;
    const auto [t, nu] = crossing_frame(p);
    return {p, std::cos(pi * c.theta) * t + std::sin(pi * c.theta) * nu};
  }

  /// Inverse of `to_tangent`; also reports the side the vector points to.
  SectionCoord to_coord(const UnitTangent& v, int* side = nullptr) const {
    if (std::abs(level(v.base)) > 1e-6) {
      throw PreconditionError("section", "to_coord: base point is not on the closed geodesic (offset " +
                                             std::to_string(level(v.base)) + ")");
    }
    return coord_at(v.base, v.direction, side);
  }

  /// Refuses θ outside [guard, 1 - guard], allowing 1e-9 of rounding so
  /// orbits started on the guard itself can be iterated.
  void check_guard(const SectionCoord& c) const {
    const double slack = 1e-9;
    if (!(c.theta >= opts_.theta_guard - slack && c.theta <= 1.0 - opts_.theta_guard + slack)) {
      std::ostringstream os;
      os << "tangency guard: theta = " << c.theta << " outside [" << opts_.theta_guard << ", "
         << 1.0 - opts_.theta_guard << "]";
      throw PreconditionError("section", os.str());
    }
  }

  struct Scan {
    std::vector<Crossing> crossings;
    FlowState last;
    bool complete = false;
  };

  /// Crossings of γ by the orbit of v (based on γ) over flow time [0, t_end]
  /// (t_end may be negative), up to `max_count` of them. The start itself
  /// is not reported.
  Scan crossings(const UnitTangent& v, double t_end,
                 std::size_t max_count = std::numeric_limits<std::size_t>::max()) const {
    IntegratorOptions io;
    io.tol = opts_.tol;
    io.max_step = max_step_;
    io.initial_step = std::min(1e-2, max_step_);
    GeodesicIntegrator integ(surface_, {v.base, v.direction, 0.0}, io);
    const double dir = t_end >= 0.0 ? 1.0 : -1.0;
    // the start lies on γ: its sign is the one the orbit takes right after
    bool prev_positive = dir * level_gradient(v.base).dot(v.direction) >= 0.0;
    double prev_level = 0.0;
    Scan scan;
    auto on_step = [&](const FlowState& prev, const FlowState& cur) {
      const double f = level(cur.base);
      const bool positive = f >= 0.0;
      if (positive != prev_positive && scan.crossings.size() < max_count && bracket_ok(prev_level, f)) {
        Crossing c = refine(integ, prev, cur, prev_positive);
        if (opts_.policy == CrossingPolicy::every_crossing || c.side > 0) scan.crossings.push_back(c);
      }
      prev_positive = positive;
      prev_level = f;
    };
    const double chunk = 1.0;
    double t = 0.0;
    while (dir * t < dir * t_end && scan.crossings.size() < max_count) {
      t = dir * std::min(std::abs(t) + chunk, std::abs(t_end));
      integ.advance_to(t, on_step);
    }
    if (scan.crossings.size() > max_count) scan.crossings.resize(max_count);
    scan.complete = scan.crossings.size() >= max_count;
    scan.last = integ.state();
    return scan;
  }

 private:
  std::pair<Vec2, Vec2> crossing_frame(const ChartPoint& p) const {
    const Mat2 g = metric_at(surface_, p);
    const Vec2 a = level_gradient(p);
    Vec2 t(a(1), -a(0));
    t /= std::sqrt(g_inner(g, t, t));
    return {t, left_normal(g, t)};
  }

  SectionCoord coord_at(const ChartPoint& p, const Vec2& w, int* side) const {
    const Mat2 g = metric_at(surface_, p);
    const auto [t, nu] = crossing_frame(p);
    (void)nu;
    if (side) *side = level_gradient(p).dot(w) >= 0.0 ? 1 : -1;
    return {locate(p), g_angle(g, w, t) / pi};
  }

  bool bracket_ok(double a, double b) const {
    if (kind_ == Kind::line) return std::abs(a - b) < 0.5 * line_spacing_;
    if (kind_ == Kind::curve) return std::abs(a) < strip_ && std::abs(b) < strip_;
    return true;
  }

  Crossing refine(const GeodesicIntegrator& integ, const FlowState& prev, const FlowState& cur,
                  bool prev_positive) const {
    double ta = prev.time, tb = cur.time;
    while (std::abs(tb - ta) > opts_.time_tol) {
      const double mid = 0.5 * (ta + tb);
      const FlowState s = integ.step_from(prev, mid - prev.time);
      if ((level(s.base) >= 0.0) == prev_positive)
        ta = mid;
      else
        tb = mid;
    }
    Crossing c;
    c.state = integ.step_from(prev, 0.5 * (ta + tb) - prev.time);
    c.coord = coord_at(c.state.base, c.state.velocity, &c.side);
    return c;
  }

  double wrap_s(double s) const {
    double r = std::fmod(s, length_);
    if (r < 0) r += length_;
    if (r >= length_) r = 0.0;
    return r;
  }

  void init_sphere_family() {
    const FlowState& s0 = gamma_.states.front();
    const Vec3 n0 = sphere_->ambient(s0.base);
    const Vec3 xi0 = sphere_->ambient_jacobian(s0.base) * s0.velocity;
    normal_ = n0.cross(xi0).normalized();
    double off_plane = 0.0;
    for (const auto& st : gamma_.states) off_plane = std::max(off_plane, std::abs(sphere_->ambient(st.base).dot(normal_)));
    strip_ = 0.1 * pi * sphere_->axes().minCoeff();
    if (off_plane < 1e-6) {
      kind_ = Kind::plane;
      b1_ = n0;
      b2_ = normal_.cross(n0);
      panel_s_.assign(panels + 1, 0.0);
      for (int k = 0; k < panels; ++k)
        panel_s_[k + 1] = panel_s_[k] + detail::gauss_legendre([this](double x) { return speed(x); }, two_pi * k / panels,
                                                           two_pi * (k + 1) / panels, 1);
      length_ = panel_s_.back();
      if (std::abs(length_ - gamma_.period) > 1e-6 * std::max(1.0, length_)) {
        std::ostringstream os;
        os << "closed geodesic period " << gamma_.period << " disagrees with the length " << length_
           << " of its plane section";
        throw PreconditionError("section", os.str());
      }
    } else {
      kind_ = Kind::curve;
      length_ = gamma_.period;
      curve_pts_.reserve(gamma_.states.size());
      for (const auto& st : gamma_.states) {
        curve_pts_.push_back(sphere_->ambient(st.base));
        curve_vel_.push_back(sphere_->ambient_jacobian(st.base) * st.velocity);
      }
    }
  }

  void init_torus() {
    kind_ = Kind::line;
    length_ = gamma_.period;
    const FlowState& s0 = gamma_.states.front();
    line_origin_ = s0.base.coords();
    line_tangent_ = s0.velocity.normalized();
    line_normal_ = Vec2(-line_tangent_(1), line_tangent_(0));
    line_spacing_ = torus_->period_u() * torus_->period_v() / length_;
    strip_ = 0.5 * line_spacing_;
  }

  double speed(double psi) const {
    const Vec3 n = std::cos(psi) * b1_ + std::sin(psi) * b2_;
    const Vec3 dn = -std::sin(psi) * b1_ + std::cos(psi) * b2_;
    return std::sqrt(dn.dot(sphere_->form_at(n) * dn));
  }

  double arc_from_angle(double psi) const {
    const double w = two_pi / panels;
    const int k = std::clamp(static_cast<int>(psi / w), 0, panels - 1);
    return panel_s_[k] + detail::gauss_legendre([this](double x) { return speed(x); }, k * w, psi, 1);
  }

  double angle_from_arc(double s) const {
    const auto it = std::upper_bound(panel_s_.begin(), panel_s_.end(), s);
    const int k = std::clamp(static_cast<int>(it - panel_s_.begin()) - 1, 0, panels - 1);
    const double w = two_pi / panels;
    double psi = w * (k + (s - panel_s_[k]) / (panel_s_[k + 1] - panel_s_[k]));
    for (int iter = 0; iter < 30; ++iter) {
      const double step = (arc_from_angle(psi) - s) / speed(psi);
      psi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return psi;
  }

  /// Cubic Hermite interpolant of the sampled orbit (ambient picture) at
  /// time tau: position, first and second derivative.
  std::tuple<Vec3, Vec3, Vec3> hermite(double tau) const {
    const std::size_t n = curve_pts_.size();
    const double dt = gamma_.period / n;
    tau = wrap_s(tau);
    const std::size_t i = std::min(n - 1, static_cast<std::size_t>(tau / dt));
    const std::size_t j = (i + 1) % n;
    const double x = tau / dt - i;
    const Vec3& p0 = curve_pts_[i];
    const Vec3& p1 = curve_pts_[j];
    const Vec3 m0 = dt * curve_vel_[i];
    const Vec3 m1 = dt * curve_vel_[j];
    const double x2 = x * x, x3 = x2 * x;
    const Vec3 c = (2 * x3 - 3 * x2 + 1) * p0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * p1 + (x3 - x2) * m1;
    const Vec3 dc = ((6 * x2 - 6 * x) * p0 + (3 * x2 - 4 * x + 1) * m0 + (-6 * x2 + 6 * x) * p1 + (3 * x2 - 2 * x) * m1) / dt;
    const Vec3 ddc = ((12 * x - 6) * p0 + (6 * x - 4) * m0 + (-12 * x + 6) * p1 + (6 * x - 2) * m1) / (dt * dt);
    return {c, dc, ddc};
  }

  /// Nearest parameter on the interpolant and the signed offset along
  /// the left normal C x C'.
  std::pair<double, double> curve_projection(const Vec3& n) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve_pts_.size(); ++i) {
      const double d = (curve_pts_[i] - n).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const double dt = gamma_.period / curve_pts_.size();
    double tau = best * dt;
    for (int iter = 0; iter < 20; ++iter) {
      const auto [c, dc, ddc] = hermite(tau);
      const Vec3 r = c - n;
      const double step = r.dot(dc) / (dc.squaredNorm() + r.dot(ddc));
      tau -= std::clamp(step, -dt, dt);
      if (std::abs(step) < 1e-14) break;
    }
    const auto [c, dc, ddc] = hermite(tau);
    (void)ddc;
    const Vec3 nu = c.cross(dc).normalized();
    return {tau, (n - c).dot(nu)};
  }

  static constexpr int panels = 256;

  Surface surface_;
  ClosedGeodesic gamma_;
  SectionOptions opts_;
  Kind kind_ = Kind::plane;
  double length_ = 0.0;
  double strip_ = std::numeric_limits<double>::infinity();
  double max_step_ = 0.1;
  const SphereFamilyModel* sphere_ = nullptr;
  const FlatTorusModel* torus_ = nullptr;
  // plane
  Vec3 normal_ = Vec3::Zero(), b1_ = Vec3::Zero(), b2_ = Vec3::Zero();
  std::vector<double> panel_s_;
  // line
  Vec2 line_origin_ = Vec2::Zero(), line_tangent_ = Vec2::Zero(), line_normal_ = Vec2::Zero();
  double line_spacing_ = 1.0;
  // curve
  std::vector<Vec3> curve_pts_, curve_vel_;
};

/// Validates γ (closed within 1e-6, simple) and builds its section.
inline Section build_section(const Surface& surface, const ClosedGeodesic& gamma, SectionOptions opts = {}) {
  if (gamma.surface.name() != surface.name()) {
    throw PreconditionError("section", "closed geodesic belongs to " + gamma.surface.name() + ", not " + surface.name());
  }
  const ClosedGeodesicCheck check = check_closed_geodesic(gamma);
  if (!check.closed) {
    throw PreconditionError("section", "geodesic does not close: d(Φ_L(v), v) = " + std::to_string(check.closure));
  }
  if (!check.simple) {
    throw PreconditionError("section", "closed geodesic is not simple: samples " +
                                           std::to_string(check.min_separation) + " apart");
  }
  return Section(surface, gamma, opts);
}

/// F(c): the next crossing of γ after leaving it at c.
inline ReturnResult return_map(const Section& section, const SectionCoord& c) {
  section.check_guard(c);
  const double horizon = section.options().horizon;
  auto scan = section.crossings(section.to_tangent(c), horizon, 1);
  if (!scan.complete) {
    throw HorizonError("no return to the section within flow time " + std::to_string(horizon), scan.crossings,
                       scan.last);
  }
  const Crossing& x = scan.crossings.front();
  const double guard = section.options().theta_guard;
  return {x.coord, x.state.time, x.side, x.coord.theta < guard || x.coord.theta > 1.0 - guard};
}

/// t(n, c): total flow time of n iterations of F.
inline double return_time_n(const Section& section, const SectionCoord& c, int n) {
  if (n < 0) throw PreconditionError("section", "return count n must be nonnegative");
  double total = 0.0;
  SectionCoord cur = c;
  for (int k = 0; k < n; ++k) {
    const ReturnResult r = return_map(section, cur);
    total += r.time;
    cur = r.coord;
  }
  return total;
}

/// P(c, t) = max{n : t(n, c) <= t}, accumulated exactly as return_time_n
/// does so that P(c, t(n, c)) = n holds bit for bit.
inline int crossing_count(const Section& section, const SectionCoord& c, double t) {
  if (!(t >= 0.0)) throw PreconditionError("section", "crossing_count needs t >= 0");
  double total = 0.0;
  SectionCoord cur = c;
  int n = 0;
  for (;;) {
    const ReturnResult r = return_map(section, cur);
    total += r.time;
    if (total > t) return n;
    ++n;
    cur = r.coord;
  }
}

/// Empirical s(θ₀, θ₁, M): the smallest gap between consecutive crossing
/// times in [-M, M] over seeds in the band. Seeds are the lattice points
/// s = i L / n_samples and θ = j / 40 that fall inside [θ₀, θ₁] (the band
/// midpoint when none does), so narrowing the band only removes seeds.
inline double min_return_gap(const Section& section, double theta0, double theta1, double m, int n_samples) {
  if (!(theta0 > 0.0 && theta0 < theta1 && theta1 < 1.0))
    throw PreconditionError("section", "min_return_gap needs 0 < theta0 < theta1 < 1");
  if (!(m > 0.0)) throw PreconditionError("section", "min_return_gap needs M > 0");
  if (n_samples < 1) throw PreconditionError("section", "min_return_gap needs n_samples >= 1");
  std::vector<double> thetas;
  for (int j = 1; j < 40; ++j) {
    const double th = j / 40.0;
    if (th >= theta0 - 1e-12 && th <= theta1 + 1e-12) thetas.push_back(th);
  }
  if (thetas.empty()) thetas.push_back(0.5 * (theta0 + theta1));
  double best = std::numeric_limits<double>::infinity();
  for (double th : thetas) {
    for (int i = 0; i < n_samples; ++i) {
      const SectionCoord c{section.length() * i / n_samples, th};
      const UnitTangent v = section.to_tangent(c);
      const auto fwd = section.crossings(v, m);
      const auto bwd = section.crossings(v, -m);
      if (fwd.crossings.size() < 2 || bwd.crossings.size() < 2) {
        std::ostringstream os;
        os << "insufficient horizon M = " << m << " at (s, theta) = (" << c.s << ", " << th << "): "
           << fwd.crossings.size() << " forward and " << bwd.crossings.size() << " backward crossings";
        auto partial = fwd.crossings;
        partial.insert(partial.end(), bwd.crossings.begin(), bwd.crossings.end());
        throw HorizonError(os.str(), partial, fwd.last);
      }
      std::vector<double> times{0.0};
      for (const auto& x : fwd.crossings) times.push_back(x.state.time);
      for (const auto& x : bwd.crossings) times.push_back(x.state.time);
      std::sort(times.begin(), times.end());
      for (std::size_t k = 1; k < times.size(); ++k) best = std::min(best, times[k] - times[k - 1]);
    }
  }
  if (!(best > 0.0)) throw NumericalError("section", "nonpositive return gap " + std::to_string(best));
  return best;
}

/// A point of the two-point compactification of the annulus.
struct CompactifiedPoint {
  enum class Kind { interior, plus_infinity, minus_infinity };

  Kind kind = Kind::interior;
  SectionCoord coord;

  static CompactifiedPoint interior(SectionCoord c) { return {Kind::interior, c}; }
  static CompactifiedPoint plus_infinity() { return {Kind::plus_infinity, {0.0, 1.0}}; }
  static CompactifiedPoint minus_infinity() { return {Kind::minus_infinity, {0.0, 0.0}}; }
  bool is_pole() const { return kind != Kind::interior; }
};

/// θ <= 0 and θ >= 1 collapse to the poles.
inline CompactifiedPoint compactify(const SectionCoord& c) {
  if (c.theta <= 0.0) return CompactifiedPoint::minus_infinity();
  if (c.theta >= 1.0) return CompactifiedPoint::plus_infinity();
  return CompactifiedPoint::interior(c);
}

/// Unit-sphere embedding: azimuth 2πs/L, polar angle πθ. minus-infinity
/// is the pole (0, 0, 1), plus-infinity is (0, 0, -1).
inline Vec3 embed(const CompactifiedPoint& p, double length) {
  switch (p.kind) {
    case CompactifiedPoint::Kind::minus_infinity: return Vec3(0.0, 0.0, 1.0);
    case CompactifiedPoint::Kind::plus_infinity: return Vec3(0.0, 0.0, -1.0);
    case CompactifiedPoint::Kind::interior: break;
  }
  const double az = two_pi * p.coord.s / length;
  const double pol = pi * p.coord.theta;
  return {std::sin(pol) * std::cos(az), std::sin(pol) * std::sin(az), std::cos(pol)};
}

/// Chordal distance in the embedding.
inline double compactified_distance(const CompactifiedPoint& a, const CompactifiedPoint& b, double length) {
  return (embed(a, length) - embed(b, length)).norm();
}

/// Inverse of `embed` (points off the poles map to interior coordinates).
inline CompactifiedPoint from_embedding(const Vec3& x, double length) {
  const Vec3 n = x.normalized();
  if (n.z() >= 1.0 - 1e-15) return CompactifiedPoint::minus_infinity();
  if (n.z() <= -1.0 + 1e-15) return CompactifiedPoint::plus_infinity();
  double az = std::atan2(n.y(), n.x());
  if (az < 0) az += two_pi;
  return CompactifiedPoint::interior({length * az / two_pi, std::acos(std::clamp(n.z(), -1.0, 1.0)) / pi});
}

/// F extended to S² with both poles fixed. Interior points outside the
/// tangency guard raise PreconditionError.
class ExtendedReturnMap {
 public:
  explicit ExtendedReturnMap(const Section& section) : section_(&section) {}

  double length() const { return section_->length(); }
  const Section& section() const { return *section_; }

  CompactifiedPoint operator()(const CompactifiedPoint& p) const {
    if (p.is_pole()) return p;
    ReturnResult r = return_map(*section_, p.coord);
    return CompactifiedPoint::interior(r.coord);
  }

  double distance(const CompactifiedPoint& a, const CompactifiedPoint& b) const {
    return compactified_distance(a, b, length());
  }

 private:
  const Section* section_;
};

struct ReturnRow {
  SectionCoord from;
  SectionCoord to;
  double return_time = 0.0;
};

/// F on an n_s x n_theta grid with θ_j = (j + 1/2) / n_theta.
inline std::vector<ReturnRow> return_map_grid(const Section& section, int n_s, int n_theta) {
  if (n_s < 1 || n_theta < 1) throw PreconditionError("section", "grid resolution must be positive");
  std::vector<ReturnRow> rows;
  for (int i = 0; i < n_s; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const SectionCoord c{section.length() * i / n_s, (j + 0.5) / n_theta};
      if (c.theta < section.options().theta_guard || c.theta > 1.0 - section.options().theta_guard) continue;
      const ReturnResult r = return_map(section, c);
      rows.push_back({c, r.coord, r.time});
    }
  }
  return rows;
}

/// n successive returns starting at c.
inline std::vector<ReturnRow> section_orbit(const Section& section, SectionCoord c, int n) {
  std::vector<ReturnRow> rows;
  for (int k = 0; k < n; ++k) {
    const ReturnResult r = return_map(section, c);
    rows.push_back({c, r.coord, r.time});
    c = r.coord;
  }
  return rows;
}

/// CSV with columns s,theta,s_next,theta_next,return_time.
inline void write_section_csv(std::ostream& os, const std::vector<ReturnRow>& rows) {
  os << "s,theta,s_next,theta_next,return_time\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.from.s << ',' << r.from.theta << ',' << r.to.s << ',' << r.to.theta << ',' << r.return_time << '\n';
}

/// Section along the closed geodesic through v0 with the given period.
inline Section section_through(const Surface& surface, const UnitTangent& v0, double period, SectionOptions opts = {}) {
  return build_section(surface, make_closed_geodesic(surface, v0, period), opts);
}

/// The equator of the sphere-family scenarios (polar angle π/2, heading
/// east) or the u axis of the flat torus.
inline Section default_section(const Surface& surface, SectionOptions opts = {}) {
  const auto& model = surface.model();
  if (const auto* sf = dynamic_cast<const SphereFamilyModel*>(&model)) {
    const ChartPoint p{pi / 2, 0.0, 0};
    const UnitTangent v0 = make_unit_tangent(surface, p, Vec2(0.0, 1.0));
    const Vec3 ax = sf->axes();
    double period = 0.0;
    if (sf->form() == SphereFamilyModel::Form::ellipsoid) {
      // equator ellipse with semi-axes a, b
      const SphereFamilyModel& m = *sf;
      period = detail::gauss_legendre(
          [&](double psi) {
            const Vec3 dn(-std::sin(psi), std::cos(psi), 0.0);
            return std::sqrt(dn.dot(m.form_at(Vec3(std::cos(psi), std::sin(psi), 0.0)) * dn));
          },
          0.0, two_pi, 64);
    } else {
      period = two_pi * ax(0);
    }
    return section_through(surface, v0, period, opts);
  }
  if (const auto* torus = dynamic_cast<const FlatTorusModel*>(&model)) {
    return section_through(surface, {{0.0, 0.0, 0}, Vec2(1.0, 0.0)}, torus->period_u(), opts);
  }
  throw PreconditionError("section", "no default section on " + surface.name());
}

}  // namespace geoflow
