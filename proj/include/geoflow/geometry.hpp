#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>

#include "geoflow/errors.hpp"

namespace geoflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// A point in a surface chart. Surfaces with more than one chart (the
/// sphere family rotates its polar axis near the poles) record which one.
struct ChartPoint {
  double u = 0.0;
  double v = 0.0;
  int chart = 0;

  Vec2 coords() const { return {u, v}; }
  static ChartPoint from(const Vec2& x, int chart = 0) { return {x(0), x(1), chart}; }
};

/// A point of the unit tangent bundle: base point plus chart velocity
/// components of g-norm one.
struct UnitTangent {
  ChartPoint base;
  Vec2 direction = Vec2::Zero();
};

/// Metric components and their first chart derivatives, dg[k] = d g / d x^k.
struct MetricJet {
  Mat2 g = Mat2::Identity();
  std::array<Mat2, 2> dg{Mat2::Zero(), Mat2::Zero()};
};

/// Christoffel symbols of the second kind, gamma[k][i][j] = Γ^k_{ij}.
struct Christoffel {
  double gamma[2][2][2] = {};

  double operator()(int k, int i, int j) const { return gamma[k][i][j]; }
};

struct DistanceEstimate {
  double value = 0.0;
  /// Zero for closed forms; otherwise upper bound minus a proven lower bound.
  double error_bound = 0.0;
};

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double period() const { return hi - lo; }
};

struct ChartDomain {
  AxisSpec u;
  AxisSpec v;
};

/// Closed-form description of one catalog surface. Implementations are
/// immutable and shared between Surface handles.
class MetricModel {
 public:
  virtual ~MetricModel() = default;

  virtual ChartDomain domain() const = 0;
  virtual Mat2 metric(const ChartPoint& p) const = 0;
  /// Analytic metric derivatives.
  virtual MetricJet jet(const ChartPoint& p) const = 0;

  /// Chart-independent position in R^3 (unit sphere coordinates for the
  /// sphere family, (u, v, 0) or the flat image for planar surfaces).
  virtual Vec3 ambient(const ChartPoint& p) const = 0;
  virtual Mat32 ambient_jacobian(const ChartPoint& p) const = 0;

  virtual int chart_count() const { return 1; }
  /// Chart to switch to when `p` is badly conditioned in its own chart.
  virtual std::optional<int> better_chart(const ChartPoint&) const { return std::nullopt; }
  virtual ChartPoint to_chart(const ChartPoint& p, int chart) const {
    if (chart != p.chart) throw PreconditionError("geometry", "surface has a single chart");
    return p;
  }
  /// Express a chart point in the primary chart when that chart is
  /// regular there; otherwise leave it unchanged.
  virtual ChartPoint prefer_primary(const ChartPoint& p) const { return p; }

  virtual DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const = 0;
  /// Parallel transport of `w` at `p` to `q` along a minimal (or
  /// near-minimal) base path. Result is in the chart of `q`.
  virtual Vec2 transport(const ChartPoint& p, const Vec2& w, const ChartPoint& q) const = 0;

  /// Clairaut integral g(v, K) for the rotational Killing field K, when the
  /// surface is one of revolution.
  virtual std::optional<double> clairaut(const ChartPoint&, const Vec2&) const { return std::nullopt; }

  /// Orbit left the declared bounds of a noncompact chart.
  virtual bool escaped(const ChartPoint&) const { return false; }

  /// Random unit tangent with the base away from chart singularities.
  virtual UnitTangent sample(std::mt19937_64& rng) const = 0;
};

enum class SurfaceKind { sphere, ellipsoid, zoll, flat_torus, plane_flat, plane_exp };

inline const char* to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::ellipsoid: return "ellipsoid";
    case SurfaceKind::zoll: return "zoll";
    case SurfaceKind::flat_torus: return "flat_torus";
    case SurfaceKind::plane_flat: return "plane_flat";
    case SurfaceKind::plane_exp: return "plane_exp";
  }
  return "unknown";
}

/// Value handle for a catalog surface: a single chart with periodic
/// identifications plus the closed-form model behind it.
class Surface {
 public:
  Surface(std::string name, SurfaceKind kind, bool compact, bool cartesian_plane,
          std::shared_ptr<const MetricModel> model)
      : name_(std::move(name)),
        kind_(kind),
        compact_(compact),
        cartesian_plane_(cartesian_plane),
        model_(std::move(model)) {}

  const std::string& name() const { return name_; }
  SurfaceKind kind() const { return kind_; }
  bool compact() const { return compact_; }
  /// Chart is Cartesian R^2 (the planar scenarios), so d1 is defined.
  bool cartesian_plane() const { return cartesian_plane_; }
  const MetricModel& model() const { return *model_; }
  ChartDomain domain() const { return model_->domain(); }

  /// Wrap periodic coordinates into [lo, hi); reject anything else outside.
  ChartPoint normalize(ChartPoint p) const {
    const auto dom = model_->domain();
    p.u = normalize_axis(p.u, dom.u, "u");
    p.v = normalize_axis(p.v, dom.v, "v");
    return p;
  }

 private:
  static double normalize_axis(double x, const AxisSpec& axis, const char* label) {
    if (!std::isfinite(x)) throw DomainError("geometry", std::string("non-finite chart coordinate ") + label);
    if (axis.periodic) {
      double r = std::fmod(x - axis.lo, axis.period());
      if (r < 0) r += axis.period();
      if (r >= axis.period()) r = 0.0;
      return axis.lo + r;
    }
    if (x < axis.lo || x > axis.hi) {
      std::ostringstream os;
      os << "chart coordinate " << label << " = " << x << " outside [" << axis.lo << ", " << axis.hi << "]";
      throw DomainError("geometry", os.str());
    }
    return x;
  }

  std::string name_;
  SurfaceKind kind_;
  bool compact_;
  bool cartesian_plane_;
  std::shared_ptr<const MetricModel> model_;
};

namespace detail {

inline std::string describe(const ChartPoint& p) {
  std::ostringstream os;
  os << "(" << p.u << ", " << p.v << ") in chart " << p.chart;
  return os.str();
}

inline void require_positive_definite(const Mat2& g, const ChartPoint& p) {
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  if (!(g(0, 0) > 0.0) || !(det > 1e-300)) {
    throw NumericalError("geometry", "degenerate metric at " + describe(p));
  }
}

inline Christoffel christoffel_from_jet(const MetricJet& jet) {
  const Mat2 ginv = jet.g.inverse();
  // first kind: [ij, l] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
  double first[2][2][2];
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        first[l][i][j] = 0.5 * (jet.dg[i](l, j) + jet.dg[j](l, i) - jet.dg[l](i, j));
  Christoffel c;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        const double s = ginv(k, 0) * first[0][i][j] + ginv(k, 1) * first[1][i][j];
        c.gamma[k][i][j] = s;
        c.gamma[k][j][i] = s;
      }
  return c;
}

}  // namespace detail

inline double g_inner(const Mat2& g, const Vec2& a, const Vec2& b) { return a.dot(g * b); }

/// Orthonormal frame (columns) for the inner product `g`, first column along
/// the u axis, positively oriented.
inline Eigen::Matrix2d orthonormal_frame(const Mat2& g) {
  Vec2 e1(1.0, 0.0);
  e1 /= std::sqrt(g_inner(g, e1, e1));
  Vec2 e2(0.0, 1.0);
  e2 -= g_inner(g, e2, e1) * e1;
  e2 /= std::sqrt(g_inner(g, e2, e2));
  Eigen::Matrix2d frame;
  frame << e1, e2;
  return frame;
}

/// Rotate `w` by +pi/2 with respect to `g` (left normal).
inline Vec2 left_normal(const Mat2& g, const Vec2& w) {
  const double sqrt_det = std::sqrt(g.determinant());
  // J = g^{-1} * [[0,-1],[1,0]] * sqrt(det g)
  const Vec2 rotated(-(g(0, 1) * w(0) + g(1, 1) * w(1)), g(0, 0) * w(0) + g(0, 1) * w(1));
  return rotated / sqrt_det;
}

/// Unsigned angle in [0, pi] between two vectors under `g`, computed with
/// atan2 so tiny angles keep full precision.
inline double g_angle(const Mat2& g, const Vec2& a, const Vec2& b) {
  const double dot = g_inner(g, a, b);
  const double cross = std::sqrt(g.determinant()) * (a(0) * b(1) - a(1) * b(0));
  return std::atan2(std::abs(cross), dot);
}

inline Mat2 metric_at(const Surface& surface, const ChartPoint& p) {
  const ChartPoint q = surface.normalize(p);
  const Mat2 g = surface.model().metric(q);
  detail::require_positive_definite(g, q);
  return g;
}

/// Analytic Christoffel symbols.
inline Christoffel christoffel(const Surface& surface, const ChartPoint& p) {
  const ChartPoint q = surface.normalize(p);
  const MetricJet jet = surface.model().jet(q);
  detail::require_positive_definite(jet.g, q);
  return detail::christoffel_from_jet(jet);
}

/// Christoffel symbols from central differences of the metric with step
/// 1e-5 * max(1, |x|).
inline Christoffel christoffel_fd(const Surface& surface, const ChartPoint& p) {
  const ChartPoint q = surface.normalize(p);
  const auto& model = surface.model();
  MetricJet jet;
  jet.g = model.metric(q);
  detail::require_positive_definite(jet.g, q);
  for (int k = 0; k < 2; ++k) {
    const double x = (k == 0) ? q.u : q.v;
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    ChartPoint plus = q, minus = q;
    (k == 0 ? plus.u : plus.v) += h;
    (k == 0 ? minus.u : minus.v) -= h;
    jet.dg[k] = (model.metric(plus) - model.metric(minus)) / (2.0 * h);
  }
  return detail::christoffel_from_jet(jet);
}

/// Contract Γ^k_{ij} a^i b^j.
inline Vec2 contract(const Christoffel& c, const Vec2& a, const Vec2& b) {
  Vec2 out;
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += c.gamma[k][i][j] * a(i) * b(j);
    out(k) = s;
  }
  return out;
}

inline double g_norm(const Surface& surface, const ChartPoint& p, const Vec2& w) {
  return std::sqrt(g_inner(surface.model().metric(p), w, w));
}

/// Build a unit tangent, rescaling `direction` to unit g-norm.
inline UnitTangent make_unit_tangent(const Surface& surface, const ChartPoint& base, const Vec2& direction) {
  const ChartPoint p = surface.normalize(base);
  const Mat2 g = metric_at(surface, p);
  const double n = std::sqrt(g_inner(g, direction, direction));
  if (!(n > 0.0) || !std::isfinite(n)) throw PreconditionError("geometry", "zero or non-finite direction");
  return {p, direction / n};
}

/// Unit tangent at `base` making angle `alpha` with the u axis (measured
/// counterclockwise in a g-orthonormal frame).
inline UnitTangent unit_tangent_at_angle(const Surface& surface, const ChartPoint& base, double alpha) {
  const ChartPoint p = surface.normalize(base);
  const Eigen::Matrix2d frame = orthonormal_frame(metric_at(surface, p));
  return {p, std::cos(alpha) * frame.col(0) + std::sin(alpha) * frame.col(1)};
}

/// Re-express a chart vector at `p` in chart `chart` through the ambient
/// representation. Returns the converted point and vector.
inline std::pair<ChartPoint, Vec2> change_chart(const MetricModel& model, const ChartPoint& p, const Vec2& w,
                                                int chart) {
  if (chart == p.chart) return {p, w};
  const ChartPoint q = model.to_chart(p, chart);
  const Vec3 amb = model.ambient_jacobian(p) * w;
  const Mat32 jq = model.ambient_jacobian(q);
  const Vec2 wq = (jq.transpose() * jq).ldlt().solve(jq.transpose() * amb);
  return {q, wq};
}

inline UnitTangent to_chart(const Surface& surface, const UnitTangent& v, int chart) {
  auto [p, w] = change_chart(surface.model(), v.base, v.direction, chart);
  return {p, w};
}

/// Prefer the primary chart when it is regular at the base point.
inline UnitTangent prefer_primary(const Surface& surface, const UnitTangent& v) {
  const ChartPoint p = surface.model().prefer_primary(v.base);
  if (p.chart == v.base.chart) return v;
  return to_chart(surface, v, p.chart);
}

inline double angle_between(const Surface& surface, const UnitTangent& a, const UnitTangent& b) {
  UnitTangent bb = b;
  if (bb.base.chart != a.base.chart) bb = to_chart(surface, b, a.base.chart);
  const ChartPoint pa = surface.normalize(a.base);
  const ChartPoint pb = surface.normalize(bb.base);
  const auto dom = surface.domain();
  auto gap = [](double x, double y, const AxisSpec& axis) {
    double d = std::abs(x - y);
    if (axis.periodic) d = std::min(d, axis.period() - d);
    return d;
  };
  if (gap(pa.u, pb.u, dom.u) > 1e-9 || gap(pa.v, pb.v, dom.v) > 1e-9) {
    throw PreconditionError("geometry", "angle_between: base points differ: " + detail::describe(pa) + " vs " +
                                            detail::describe(pb));
  }
  return g_angle(metric_at(surface, pa), a.direction, bb.direction);
}

namespace detail {

inline double periodic_delta(double from, double to, const AxisSpec& axis) {
  double d = to - from;
  if (axis.periodic) {
    const double p = axis.period();
    d = std::remainder(d, p);
  }
  return d;
}

inline Vec2 transport_rhs(const MetricModel& model, const ChartPoint& p, const Vec2& xdot, const Vec2& w) {
  return -contract(christoffel_from_jet(model.jet(p)), xdot, w);
}

}  // namespace detail

/// Parallel transport of `w` along the chart polyline through `curve`.
/// Each segment is the straight chart segment between consecutive samples
/// (shortest representative on periodic axes), integrated with RK4.
/// Consecutive samples in different charts are bridged by a chart change.
inline Vec2 parallel_transport(const Surface& surface, std::span<const ChartPoint> curve, Vec2 w,
                               int substeps = 4) {
  if (curve.size() < 2) {
    if (curve.size() == 1) surface.normalize(curve[0]);
    return w;
  }
  const auto& model = surface.model();
  const auto dom = surface.domain();
  ChartPoint cur = surface.normalize(curve[0]);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    ChartPoint next = surface.normalize(curve[i]);
    if (next.chart != cur.chart) {
      auto [p, wc] = change_chart(model, cur, w, next.chart);
      cur = p;
      w = wc;
    }
    const Vec2 delta(detail::periodic_delta(cur.u, next.u, dom.u), detail::periodic_delta(cur.v, next.v, dom.v));
    const Vec2 x0 = cur.coords();
    const double h = 1.0 / substeps;
    auto at = [&](double s) { return ChartPoint::from(x0 + s * delta, cur.chart); };
    for (int k = 0; k < substeps; ++k) {
      const double s = k * h;
      const Vec2 k1 = detail::transport_rhs(model, at(s), delta, w);
      const Vec2 k2 = detail::transport_rhs(model, at(s + 0.5 * h), delta, w + 0.5 * h * k1);
      const Vec2 k3 = detail::transport_rhs(model, at(s + 0.5 * h), delta, w + 0.5 * h * k2);
      const Vec2 k4 = detail::transport_rhs(model, at(s + h), delta, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    cur = next;
  }
  return w;
}

/// Closed form where the catalog has one, otherwise a path-length upper
/// bound with its reported error.
inline DistanceEstimate base_distance(const Surface& surface, const ChartPoint& p, const ChartPoint& q) {
  return surface.model().distance(surface.normalize(p), surface.normalize(q));
}

}  // namespace geoflow
