#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/models.hpp"

namespace geoflow {

struct ScenarioParams {
  double radius = 1.0;
  std::array<double, 3> semi_axes{1.0, 1.2, 1.5};
  std::array<double, 2> torus_periods{1.0, 1.0};
  double zoll_lambda = 0.3;
  double blend_lo = 0.5;
  double blend_hi = 1.0;
  /// "cartesian" or "polar" (plane_exp only)
  std::string plane_chart = "cartesian";
  /// Escape radius of the noncompact charts.
  double plane_bound = 40.0;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"sphere", "ellipsoid", "flat_torus", "zoll", "plane_exp", "plane_flat"};
  return names;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("scenarios", what);
}

inline void verify_blend_monotone(const ExpBlend& blend) {
  const double top = blend.hi() + 1.0;
  double prev = blend.f(0.0);
  for (int i = 1; i <= 10000; ++i) {
    const double t = top * i / 10000.0;
    const double f = blend.f(t);
    require(f > prev && blend.df(t) > 0.0, "blend profile is not strictly increasing at t = " + std::to_string(t));
    prev = f;
  }
}

}  // namespace detail

inline Surface catalog(const std::string& name, const ScenarioParams& params = {}) {
  using detail::require;
  if (name == "sphere") {
    require(params.radius > 0.0 && std::isfinite(params.radius), "sphere radius must be positive");
    return Surface("sphere", SurfaceKind::sphere, true, false,
                   std::make_shared<SphereFamilyModel>(SphereFamilyModel::round(params.radius)));
  }
  if (name == "ellipsoid") {
    const auto& ax = params.semi_axes;
    for (double a : ax) require(a > 0.0 && std::isfinite(a), "ellipsoid semi-axes must be positive");
    return Surface("ellipsoid", SurfaceKind::ellipsoid, true, false,
                   std::make_shared<SphereFamilyModel>(SphereFamilyModel::ellipsoid(ax[0], ax[1], ax[2])));
  }
  if (name == "zoll") {
    const double pmax = 2.0 / (3.0 * std::sqrt(3.0));
    require(std::isfinite(params.zoll_lambda) && std::abs(params.zoll_lambda) * pmax < 1.0,
            "zoll_lambda must satisfy |lambda * p| < 1 on [-1, 1]");
    return Surface("zoll", SurfaceKind::zoll, true, false,
                   std::make_shared<SphereFamilyModel>(SphereFamilyModel::zoll(params.zoll_lambda)));
  }
  if (name == "flat_torus") {
    for (double p : params.torus_periods) require(p > 0.0 && std::isfinite(p), "torus periods must be positive");
    return Surface("flat_torus", SurfaceKind::flat_torus, true, false,
                   std::make_shared<FlatTorusModel>(params.torus_periods[0], params.torus_periods[1]));
  }
  if (name == "plane_flat") {
    require(params.plane_bound > 0.0, "plane_bound must be positive");
    return Surface("plane_flat", SurfaceKind::plane_flat, false, true,
                   std::make_shared<PlaneFlatModel>(params.plane_bound));
  }
  if (name == "plane_exp") {
    require(params.blend_lo > 0.0 && params.blend_hi > params.blend_lo, "blend requires 0 < blend_lo < blend_hi");
    require(params.plane_bound > params.blend_hi, "plane_bound must exceed blend_hi");
    const ExpBlend blend(params.blend_lo, params.blend_hi);
    detail::verify_blend_monotone(blend);
    if (params.plane_chart == "cartesian") {
      return Surface("plane_exp", SurfaceKind::plane_exp, false, true,
                     std::make_shared<PlaneExpModel>(blend, params.plane_bound));
    }
    require(params.plane_chart == "polar", "plane_chart must be 'cartesian' or 'polar'");
    return Surface("plane_exp", SurfaceKind::plane_exp, false, false,
                   std::make_shared<PlaneExpPolarModel>(blend, params.plane_bound));
  }
  throw ConfigError("scenarios", "unknown scenario '" + name + "'");
}

/// Exact h-geodesic of the exponential plane in polar and Cartesian form.
struct PlaneExpOracleState {
  /// Cartesian source-chart state (unit h-speed).
  FlowState state;
  /// f^{-1}(|x + t v|)
  double radius = 0.0;
  /// Continuous polar angle along the line (unwrapped).
  double angle = 0.0;
  double radial_rate = 0.0;
  double angular_rate = 0.0;
  /// The image line passes through the origin between 0 and t; the polar
  /// angle jumps by pi there while the geodesic itself stays smooth.
  bool through_origin = false;
};

/// Geodesic through the image point x with Euclidean unit direction v: the
/// F-preimage of the straight line x + t v.
inline PlaneExpOracleState oracle_geodesic_plane_exp(const ExpBlend& blend, const Vec2& x, const Vec2& v, double t) {
  const double vn = v.norm();
  if (!(vn > 0.0)) throw PreconditionError("scenarios", "oracle direction must be nonzero");
  const Vec2 dir = v / vn;
  const PlaneExpModel model(blend);
  const Vec2 y = x + t * dir;
  const double ry = y.norm();
  PlaneExpOracleState out;
  out.state.base = ChartPoint::from(model.preimage(y));
  out.state.velocity = model.differential_inverse(out.state.base.coords()) * dir;
  out.state.time = t;
  out.radius = blend.inverse(ry);

  const double cross0 = x(0) * dir(1) - x(1) * dir(0);
  const double t_closest = -x.dot(dir);
  out.through_origin = std::abs(cross0) < 1e-14 * std::max(1.0, x.norm()) && t_closest * t > 0.0 &&
                       std::abs(t_closest) <= std::abs(t);
  const double angle0 = std::atan2(x(1), x(0));
  const double swept = std::atan2(x(0) * y(1) - x(1) * y(0), x.dot(y));
  out.angle = (x.norm() == 0.0) ? std::atan2(y(1), y(0)) : angle0 + swept;
  if (ry > 0.0) {
    out.radial_rate = y.dot(dir) / (ry * blend.df(out.radius));
    out.angular_rate = (y(0) * dir(1) - y(1) * dir(0)) / (ry * ry);
  }
  return out;
}

/// 1/2 ln ratio expression for f^{-1}(|x + t v|) - f^{-1}(|y + t w|) when
/// both points lie where f = exp.
inline double plane_exp_log_gap(const Vec2& x, const Vec2& v, const Vec2& y, const Vec2& w, double t) {
  const double top = x.squaredNorm() / (t * t) + 2.0 * x.dot(v) / t + v.squaredNorm();
  const double bottom = y.squaredNorm() / (t * t) + 2.0 * y.dot(w) / t + w.squaredNorm();
  return std::abs(0.5 * std::log(top / bottom));
}

/// Closed-form flow where the catalog has one: great circles on the round
/// sphere, straight chart lines on the flat scenarios, image lines on the
/// exponential plane. None for the ellipsoid and the Zoll surface.
inline std::optional<FlowState> oracle_flow(const Surface& surface, const UnitTangent& v, double t) {
  const auto& model = surface.model();
  switch (surface.kind()) {
    case SurfaceKind::sphere: {
      const auto& m = dynamic_cast<const SphereFamilyModel&>(model);
      const double r = m.axes()(0);
      const Vec3 n0 = m.ambient(v.base);
      const Vec3 xi = m.ambient_jacobian(v.base) * v.direction;
      const double c = std::cos(t / r), s = std::sin(t / r);
      const Vec3 n = c * n0 + r * s * xi;
      const Vec3 dn = -s / r * n0 + c * xi;
      const ChartPoint p = m.prefer_primary(m.chart_point(n.normalized()));
      return FlowState{p, m.from_ambient_vector(p, dn), t};
    }
    case SurfaceKind::flat_torus:
    case SurfaceKind::plane_flat: {
      const ChartPoint p = ChartPoint::from(v.base.coords() + t * v.direction);
      if (model.escaped(p)) return std::nullopt;
      return FlowState{surface.normalize(p), v.direction, t};
    }
    case SurfaceKind::plane_exp: {
      const Vec3 x = model.ambient(v.base);
      const Vec3 dir = model.ambient_jacobian(v.base) * v.direction;
      if (surface.cartesian_plane()) {
        const auto& m = dynamic_cast<const PlaneExpModel&>(model);
        return oracle_geodesic_plane_exp(m.blend(), x.head<2>(), dir.head<2>(), t).state;
      }
      const Vec3 y = x + t * dir;
      const auto& m = dynamic_cast<const PlaneExpPolarModel&>(model);
      const PlaneExpModel cart(m.blend());
      const Vec2 src = cart.preimage(y.head<2>());
      double phi = std::atan2(src(1), src(0));
      if (phi < 0) phi += two_pi;
      const ChartPoint p{src.norm(), phi, 0};
      const Mat32 j = model.ambient_jacobian(p);
      return FlowState{p, (j.transpose() * j).ldlt().solve(j.transpose() * dir), t};
    }
    case SurfaceKind::ellipsoid:
    case SurfaceKind::zoll: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace geoflow
