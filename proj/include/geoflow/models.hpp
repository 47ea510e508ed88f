#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "geoflow/geometry.hpp"

namespace geoflow {

namespace detail {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> gl8_nodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                 0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> gl8_weights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                   0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b, int panels) {
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * w;
    for (std::size_t i = 0; i < gl8_nodes.size(); ++i) total += gl8_weights[i] * f(mid + 0.5 * w * gl8_nodes[i]);
  }
  return 0.5 * w * total;
}

inline Vec3 rodrigues(const Vec3& x, const Vec3& axis, double angle) {
  return x * std::cos(angle) + axis.cross(x) * std::sin(angle) + axis * axis.dot(x) * (1.0 - std::cos(angle));
}

/// Great-circle arc from unit vector a to unit vector b: returns angle and
/// the unit vector m orthogonal to a spanning the arc plane.
inline std::pair<double, Vec3> great_arc(const Vec3& a, const Vec3& b) {
  const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
  Vec3 m = b - a.dot(b) * a;
  const double mn = m.norm();
  if (mn < 1e-300) {
    // coincident or antipodal: any orthogonal direction
    Vec3 trial = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    m = (trial - trial.dot(a) * a).normalized();
  } else {
    m /= mn;
  }
  return {angle, m};
}

}  // namespace detail

/// Surfaces diffeomorphic to S^2, described by a smooth quadratic form Q(n)
/// on ambient tangent vectors at each unit vector n. Charts are spherical
/// coordinates (polar angle, azimuth) about the z axis (chart 0) or about
/// the x axis (chart 1); integration switches charts near the poles.
class SphereFamilyModel : public MetricModel {
 public:
  enum class Form { round, ellipsoid, zoll };

  static SphereFamilyModel round(double radius) { return SphereFamilyModel(Form::round, {radius, radius, radius}, 0.0); }
  static SphereFamilyModel ellipsoid(double a, double b, double c) { return SphereFamilyModel(Form::ellipsoid, {a, b, c}, 0.0); }
  static SphereFamilyModel zoll(double lambda) { return SphereFamilyModel(Form::zoll, {1.0, 1.0, 1.0}, lambda); }

  Form form() const { return form_; }
  const Vec3& axes() const { return axes_; }
  double lambda() const { return lambda_; }

  // Zoll profile p(x) = x (1 - x^2).
  static double zoll_profile(double x) { return x * (1.0 - x * x); }

  /// Ambient quadratic form at n.
  Mat3 form_at(const Vec3& n) const {
    switch (form_) {
      case Form::round: return axes_(0) * axes_(0) * Mat3::Identity();
      case Form::ellipsoid: return axes_.cwiseProduct(axes_).asDiagonal();
      case Form::zoll: {
        Mat3 q = Mat3::Identity();
        q(2, 2) += zoll_coefficient(n.z());
        return q;
      }
    }
    return Mat3::Identity();
  }

  /// Directional derivative of the form along ambient vector xi.
  Mat3 form_derivative(const Vec3& n, const Vec3& xi) const {
    Mat3 d = Mat3::Zero();
    if (form_ == Form::zoll) d(2, 2) = zoll_coefficient_derivative(n.z()) * xi.z();
    return d;
  }

  ChartDomain domain() const override { return {{0.0, pi, false}, {0.0, two_pi, true}}; }

  Mat2 metric(const ChartPoint& p) const override {
    const Frame f = frame(p);
    const Mat3 q = form_at(f.n);
    return f.d.transpose() * q * f.d;
  }

  MetricJet jet(const ChartPoint& p) const override {
    const Frame f = frame(p);
    const Mat3 q = form_at(f.n);
    MetricJet jet;
    jet.g = f.d.transpose() * q * f.d;
    for (int k = 0; k < 2; ++k) {
      const Mat3 dq = form_derivative(f.n, f.d.col(k));
      Mat2 dg;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          dg(i, j) = f.dd[k][i].dot(q * f.d.col(j)) + f.d.col(i).dot(q * f.dd[k][j]) +
                     f.d.col(i).dot(dq * f.d.col(j));
      jet.dg[k] = dg;
    }
    return jet;
  }

  Vec3 ambient(const ChartPoint& p) const override { return rotation(p.chart) * local(p.u, p.v); }

  Mat32 ambient_jacobian(const ChartPoint& p) const override { return frame(p).d; }

  int chart_count() const override { return 2; }

  std::optional<int> better_chart(const ChartPoint& p) const override {
    if (std::abs(std::cos(p.u)) > 0.8) return 1 - p.chart;
    return std::nullopt;
  }

  ChartPoint to_chart(const ChartPoint& p, int chart) const override {
    if (chart == p.chart) return p;
    return from_ambient(ambient(p), chart);
  }

  ChartPoint prefer_primary(const ChartPoint& p) const override {
    if (p.chart == 0) return p;
    const ChartPoint q = to_chart(p, 0);
    return std::sin(q.u) >= 1e-3 ? q : p;
  }

  ChartPoint from_ambient(const Vec3& n, int chart) const {
    const Vec3 l = rotation(chart).transpose() * n;
    const double theta = std::atan2(std::hypot(l.x(), l.y()), l.z());
    double phi = std::atan2(l.y(), l.x());
    if (phi < 0) phi += two_pi;
    if (phi >= two_pi) phi = 0.0;
    return {theta, phi, chart};
  }

  /// Chart point for n in whichever chart is regular there (primary first).
  ChartPoint chart_point(const Vec3& n) const {
    ChartPoint p = from_ambient(n, 0);
    if (std::abs(std::cos(p.u)) > 0.8) p = from_ambient(n, 1);
    return p;
  }

  /// Chart components of an ambient tangent vector at p.
  Vec2 from_ambient_vector(const ChartPoint& p, const Vec3& xi) const {
    const Mat32 j = frame(p).d;
    return (j.transpose() * j).ldlt().solve(j.transpose() * xi);
  }

  double arc_length(const Vec3& a, const Vec3& b) const {
    const auto [angle, m] = detail::great_arc(a, b);
    if (angle == 0.0) return 0.0;
    if (form_ == Form::round) return axes_(0) * angle;
    auto speed = [&](double t) {
      const Vec3 n = std::cos(t) * a + std::sin(t) * m;
      const Vec3 dn = -std::sin(t) * a + std::cos(t) * m;
      return std::sqrt(dn.dot(form_at(n) * dn));
    };
    return detail::gauss_legendre(speed, 0.0, angle, std::max(1, static_cast<int>(std::ceil(angle / 0.25))));
  }

  DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const override {
    const Vec3 a = ambient(p), b = ambient(q);
    if (form_ == Form::round) return {arc_length(a, b), 0.0};
    const double upper = arc_length(a, b);
    double lower = 0.0;
    if (form_ == Form::ellipsoid) {
      lower = (axes_.cwiseProduct(a) - axes_.cwiseProduct(b)).norm();
    } else {
      const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
      lower = std::sqrt(zoll_min_form()) * angle;
    }
    return {upper, std::max(0.0, upper - lower)};
  }

  Vec2 transport(const ChartPoint& p, const Vec2& w, const ChartPoint& q) const override {
    const Vec3 a = ambient(p), b = ambient(q);
    const auto [angle, m] = detail::great_arc(a, b);
    if (form_ == Form::round) {
      Vec3 xi = ambient_jacobian(p) * w;
      if (angle > 0.0) xi = detail::rodrigues(xi, a.cross(m).normalized(), angle);
      return from_ambient_vector(q, xi);
    }
    if (angle == 0.0) return change_chart(*this, p, w, q.chart).second;
    return transport_numeric(p, w, a, m, angle, q);
  }

  std::optional<double> clairaut(const ChartPoint& p, const Vec2& w) const override {
    const bool revolution = form_ != Form::ellipsoid || axes_(0) == axes_(1);
    if (!revolution) return std::nullopt;
    const Vec3 n = ambient(p);
    const Vec3 xi = ambient_jacobian(p) * w;
    return xi.dot(form_at(n) * Vec3::UnitZ().cross(n));
  }

  UnitTangent sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double zmax = std::cos(1e-3);
    const double z = -zmax + 2.0 * zmax * unit(rng);
    const double phi = two_pi * unit(rng);
    const double alpha = two_pi * unit(rng);
    const ChartPoint p{std::acos(z), phi, 0};
    const Eigen::Matrix2d fr = orthonormal_frame(metric(p));
    return {p, std::cos(alpha) * fr.col(0) + std::sin(alpha) * fr.col(1)};
  }

 private:
  SphereFamilyModel(Form form, Vec3 axes, double lambda) : form_(form), axes_(std::move(axes)), lambda_(lambda) {}

  struct Frame {
    Vec3 n;
    Mat32 d;                    // columns dn/du, dn/dv
    std::array<std::array<Vec3, 2>, 2> dd;  // dd[k][i] = d^2 n / dx^k dx^i
  };

  static Mat3 rotation(int chart) {
    if (chart == 0) return Mat3::Identity();
    Mat3 r;
    r.col(0) = Vec3::UnitY();
    r.col(1) = Vec3::UnitZ();
    r.col(2) = Vec3::UnitX();
    return r;
  }

  static Vec3 local(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  }

  static Frame frame(const ChartPoint& p) {
    const double st = std::sin(p.u), ct = std::cos(p.u), sp = std::sin(p.v), cp = std::cos(p.v);
    const Mat3 r = rotation(p.chart);
    Frame f;
    f.n = r * Vec3(st * cp, st * sp, ct);
    f.d.col(0) = r * Vec3(ct * cp, ct * sp, -st);
    f.d.col(1) = r * Vec3(-st * sp, st * cp, 0.0);
    const Vec3 tt = -f.n;
    const Vec3 tp = r * Vec3(-ct * sp, ct * cp, 0.0);
    const Vec3 pp = r * Vec3(-st * cp, -st * sp, 0.0);
    f.dd[0][0] = tt;
    f.dd[0][1] = tp;
    f.dd[1][0] = tp;
    f.dd[1][1] = pp;
    return f;
  }

  double zoll_coefficient(double z) const {
    // ((1 + λ p(z))^2 - 1) / (1 - z^2) with p(z) = z (1 - z^2)
    return 2.0 * lambda_ * z + lambda_ * lambda_ * z * z * (1.0 - z * z);
  }
  double zoll_coefficient_derivative(double z) const {
    return 2.0 * lambda_ + lambda_ * lambda_ * (2.0 * z - 4.0 * z * z * z);
  }
  double zoll_min_form() const {
    const double pmax = 2.0 / (3.0 * std::sqrt(3.0));
    const double m = 1.0 - std::abs(lambda_) * pmax;
    return std::min(1.0, m * m);
  }

  Vec2 transport_numeric(const ChartPoint& p, Vec2 w, const Vec3& a, const Vec3& m, double angle,
                         const ChartPoint& q) const {
    const int steps = std::max(4, static_cast<int>(std::ceil(angle / 0.05)));
    const double h = angle / steps;
    auto point = [&](double t) { return Vec3(std::cos(t) * a + std::sin(t) * m); };
    auto velocity = [&](double t) { return Vec3(-std::sin(t) * a + std::cos(t) * m); };
    ChartPoint cur = p;
    for (int s = 0; s < steps; ++s) {
      const double t0 = s * h;
      if (auto better = better_chart(cur)) {
        auto [np, nw] = change_chart(*this, cur, w, *better);
        cur = np;
        w = nw;
      }
      const int chart = cur.chart;
      auto rhs = [&](double t, const Vec2& wv) {
        const ChartPoint x = from_ambient(point(t), chart);
        const Vec2 xdot = from_ambient_vector(x, velocity(t));
        return Vec2(-contract(detail::christoffel_from_jet(jet(x)), xdot, wv));
      };
      const Vec2 k1 = rhs(t0, w);
      const Vec2 k2 = rhs(t0 + 0.5 * h, w + 0.5 * h * k1);
      const Vec2 k3 = rhs(t0 + 0.5 * h, w + 0.5 * h * k2);
      const Vec2 k4 = rhs(t0 + h, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      cur = from_ambient(point(t0 + h), chart);
    }
    return change_chart(*this, cur, w, q.chart).second;
  }

  Form form_;
  Vec3 axes_;
  double lambda_;
};

/// Flat torus [0, a) x [0, b) with the Euclidean metric.
class FlatTorusModel : public MetricModel {
 public:
  FlatTorusModel(double a, double b) : a_(a), b_(b) {}

  double period_u() const { return a_; }
  double period_v() const { return b_; }

  ChartDomain domain() const override { return {{0.0, a_, true}, {0.0, b_, true}}; }
  Mat2 metric(const ChartPoint&) const override { return Mat2::Identity(); }
  MetricJet jet(const ChartPoint&) const override { return {}; }
  Vec3 ambient(const ChartPoint& p) const override { return {p.u, p.v, 0.0}; }
  Mat32 ambient_jacobian(const ChartPoint&) const override {
    Mat32 j = Mat32::Zero();
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    return j;
  }

  /// Shortest representative of q - p in the covering plane.
  Vec2 wrapped_delta(const ChartPoint& p, const ChartPoint& q) const {
    return {std::remainder(q.u - p.u, a_), std::remainder(q.v - p.v, b_)};
  }

  DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const override {
    return {wrapped_delta(p, q).norm(), 0.0};
  }
  Vec2 transport(const ChartPoint&, const Vec2& w, const ChartPoint&) const override { return w; }

  UnitTangent sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double alpha = two_pi * unit(rng);
    const double u = a_ * unit(rng);
    const double v = b_ * unit(rng);
    return {{u, v, 0}, {std::cos(alpha), std::sin(alpha)}};
  }

 private:
  double a_, b_;
};

/// Euclidean plane in Cartesian coordinates.
class PlaneFlatModel : public MetricModel {
 public:
  explicit PlaneFlatModel(double bound = 1e6, double sample_radius = 3.0) : bound_(bound), sample_radius_(sample_radius) {}

  ChartDomain domain() const override { return {{-bound_, bound_, false}, {-bound_, bound_, false}}; }
  Mat2 metric(const ChartPoint&) const override { return Mat2::Identity(); }
  MetricJet jet(const ChartPoint&) const override { return {}; }
  Vec3 ambient(const ChartPoint& p) const override { return {p.u, p.v, 0.0}; }
  Mat32 ambient_jacobian(const ChartPoint&) const override {
    Mat32 j = Mat32::Zero();
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    return j;
  }
  DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const override {
    return {std::hypot(q.u - p.u, q.v - p.v), 0.0};
  }
  Vec2 transport(const ChartPoint&, const Vec2& w, const ChartPoint&) const override { return w; }
  bool escaped(const ChartPoint& p) const override { return std::abs(p.u) > bound_ || std::abs(p.v) > bound_; }

  UnitTangent sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = sample_radius_ * std::sqrt(unit(rng));
    const double a = two_pi * unit(rng);
    const double alpha = two_pi * unit(rng);
    return {{r * std::cos(a), r * std::sin(a), 0}, {std::cos(alpha), std::sin(alpha)}};
  }

 private:
  double bound_;
  double sample_radius_;
};

/// Smooth increasing profile f on [0, inf): identity below `lo`, exp above
/// `hi`, and f = (1 - w) t + w e^t in between with w the standard
/// exp(-1/x) smooth step.
class ExpBlend {
 public:
  ExpBlend(double lo = 0.5, double hi = 1.0) : lo_(lo), hi_(hi) {
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("scenarios", "blend requires 0 < lo < hi");
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  struct Values {
    double f, df, d2f;
  };

  Values eval(double t) const {
    if (t < lo_) return {t, 1.0, 0.0};
    const double e = std::exp(t);
    if (t >= hi_) return {e, e, e};
    const auto [w, dw, d2w] = step(t);
    const double f = (1.0 - w) * t + w * e;
    const double df = 1.0 - w + w * e + dw * (e - t);
    const double d2f = 2.0 * dw * (e - 1.0) + w * e + d2w * (e - t);
    return {f, df, d2f};
  }

  double f(double t) const { return eval(t).f; }
  double df(double t) const { return eval(t).df; }

  double inverse(double y) const {
    if (y < lo_) return y;
    const double top = std::exp(hi_);
    if (y >= top) return std::log(y);
    // safeguarded Newton on [lo, hi]; f is strictly increasing
    double a = lo_, b = hi_;
    double t = lo_ + (hi_ - lo_) * (y - lo_) / (top - lo_);
    for (int it = 0; it < 200; ++it) {
      const auto v = eval(t);
      const double r = v.f - y;
      if (r > 0) b = t; else a = t;
      if (std::abs(r) <= 1e-15 * std::max(1.0, y)) break;
      double next = t - r / v.df;
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - t) < 1e-16 * std::max(1.0, t)) {
        t = next;
        break;
      }
      t = next;
    }
    return t;
  }

 private:
  struct Step {
    double w, dw, d2w;
  };

  // psi(x) = exp(-1/x) for x > 0 with first and second derivatives
  static std::array<double, 3> psi(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    const double p = std::exp(-1.0 / x);
    const double x2 = x * x;
    return {p, p / x2, p * (1.0 / (x2 * x2) - 2.0 / (x2 * x))};
  }

  Step step(double t) const {
    const double s = 1.0 / (hi_ - lo_);
    const double x = (t - lo_) * s;
    const auto [a, da, d2a] = psi(x);
    const auto [b0, db0, d2b0] = psi(1.0 - x);
    const double b = b0, db = -db0, d2b = d2b0;
    const double sum = a + b;
    const double w = a / sum;
    const double num = da * b - a * db;
    const double dw = num / (sum * sum);
    const double dnum = d2a * b - a * d2b;
    const double d2w = dnum / (sum * sum) - 2.0 * num * (da + db) / (sum * sum * sum);
    return {w, dw * s, d2w * s * s};
  }

  double lo_, hi_;
};

/// The plane with the pull-back h = F^* g0 of the Euclidean metric under
/// F(r, phi) = (f(r), phi), in Cartesian coordinates of the source plane.
/// F is an isometry of (R^2, h) onto the Euclidean plane, so distances
/// and transport are computed exactly in the image.
class PlaneExpModel : public MetricModel {
 public:
  explicit PlaneExpModel(ExpBlend blend = {}, double bound = 40.0, double sample_radius = 3.0)
      : blend_(blend), bound_(bound), sample_radius_(sample_radius) {}

  const ExpBlend& blend() const { return blend_; }

  /// F(x) in the Euclidean image plane.
  Vec2 image(const Vec2& x) const {
    const double r = x.norm();
    if (r < blend_.lo()) return x;
    return blend_.f(r) / r * x;
  }

  Vec2 preimage(const Vec2& y) const {
    const double r = y.norm();
    if (r < blend_.lo()) return y;
    return blend_.inverse(r) / r * y;
  }

  /// dF at x.
  Mat2 differential(const Vec2& x) const {
    const double r = x.norm();
    if (r < blend_.lo()) return Mat2::Identity();
    const Vec2 e = x / r;
    const Mat2 proj = e * e.transpose();
    const auto v = blend_.eval(r);
    return v.df * proj + (v.f / r) * (Mat2::Identity() - proj);
  }

  Mat2 differential_inverse(const Vec2& x) const {
    const double r = x.norm();
    if (r < blend_.lo()) return Mat2::Identity();
    const Vec2 e = x / r;
    const Mat2 proj = e * e.transpose();
    const auto v = blend_.eval(r);
    return proj / v.df + (r / v.f) * (Mat2::Identity() - proj);
  }

  ChartDomain domain() const override { return {{-bound_, bound_, false}, {-bound_, bound_, false}}; }

  Mat2 metric(const ChartPoint& p) const override {
    const Vec2 x = p.coords();
    const double r = x.norm();
    if (r < blend_.lo()) return Mat2::Identity();
    const Vec2 e = x / r;
    const Mat2 proj = e * e.transpose();
    const auto v = blend_.eval(r);
    const double a = v.df * v.df, b = (v.f / r) * (v.f / r);
    return b * Mat2::Identity() + (a - b) * proj;
  }

  MetricJet jet(const ChartPoint& p) const override {
    const Vec2 x = p.coords();
    const double r = x.norm();
    MetricJet jet;
    if (r < blend_.lo()) return jet;
    const Vec2 e = x / r;
    const Mat2 proj = e * e.transpose();
    const auto v = blend_.eval(r);
    const double a = v.df * v.df, b = (v.f / r) * (v.f / r);
    const double da_dr = 2.0 * v.df * v.d2f;
    const double db_dr = 2.0 * (v.f / r) * (v.df * r - v.f) / (r * r);
    jet.g = b * Mat2::Identity() + (a - b) * proj;
    for (int k = 0; k < 2; ++k) {
      Mat2 dproj;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          dproj(i, j) = ((i == k ? e(j) : 0.0) + (j == k ? e(i) : 0.0) - 2.0 * e(i) * e(j) * e(k)) / r;
      jet.dg[k] = db_dr * e(k) * Mat2::Identity() + (da_dr - db_dr) * e(k) * proj + (a - b) * dproj;
    }
    return jet;
  }

  Vec3 ambient(const ChartPoint& p) const override {
    const Vec2 y = image(p.coords());
    return {y(0), y(1), 0.0};
  }
  Mat32 ambient_jacobian(const ChartPoint& p) const override {
    Mat32 j = Mat32::Zero();
    j.topRows<2>() = differential(p.coords());
    return j;
  }

  DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const override {
    return {(image(p.coords()) - image(q.coords())).norm(), 0.0};
  }

  Vec2 transport(const ChartPoint& p, const Vec2& w, const ChartPoint& q) const override {
    return differential_inverse(q.coords()) * (differential(p.coords()) * w);
  }

  std::optional<double> clairaut(const ChartPoint& p, const Vec2& w) const override {
    // rotations about the origin are isometries: g(w, (-y, x))
    const Vec2 k(-p.v, p.u);
    return g_inner(metric(p), w, k);
  }

  bool escaped(const ChartPoint& p) const override { return std::hypot(p.u, p.v) > bound_; }

  UnitTangent sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = sample_radius_ * std::sqrt(unit(rng));
    const double a = two_pi * unit(rng);
    const double alpha = two_pi * unit(rng);
    const ChartPoint p{r * std::cos(a), r * std::sin(a), 0};
    const Eigen::Matrix2d fr = orthonormal_frame(metric(p));
    return {p, std::cos(alpha) * fr.col(0) + std::sin(alpha) * fr.col(1)};
  }

 private:
  ExpBlend blend_;
  double bound_;
  double sample_radius_;
};

/// Same surface as PlaneExpModel in polar coordinates (r, phi): h =
/// f'(r)^2 dr^2 + f(r)^2 dphi^2. Singular at r = 0.
class PlaneExpPolarModel : public MetricModel {
 public:
  explicit PlaneExpPolarModel(ExpBlend blend = {}, double bound = 40.0) : blend_(blend), bound_(bound) {}

  const ExpBlend& blend() const { return blend_; }

  ChartDomain domain() const override { return {{0.0, bound_, false}, {0.0, two_pi, true}}; }

  Mat2 metric(const ChartPoint& p) const override {
    const auto v = blend_.eval(p.u);
    Mat2 g = Mat2::Zero();
    g(0, 0) = v.df * v.df;
    g(1, 1) = v.f * v.f;
    return g;
  }

  MetricJet jet(const ChartPoint& p) const override {
    const auto v = blend_.eval(p.u);
    MetricJet jet;
    jet.g = Mat2::Zero();
    jet.g(0, 0) = v.df * v.df;
    jet.g(1, 1) = v.f * v.f;
    jet.dg[0] = Mat2::Zero();
    jet.dg[0](0, 0) = 2.0 * v.df * v.d2f;
    jet.dg[0](1, 1) = 2.0 * v.f * v.df;
    return jet;
  }

  Vec3 ambient(const ChartPoint& p) const override {
    const double f = blend_.f(p.u);
    return {f * std::cos(p.v), f * std::sin(p.v), 0.0};
  }
  Mat32 ambient_jacobian(const ChartPoint& p) const override {
    const auto v = blend_.eval(p.u);
    Mat32 j = Mat32::Zero();
    j(0, 0) = v.df * std::cos(p.v);
    j(1, 0) = v.df * std::sin(p.v);
    j(0, 1) = -v.f * std::sin(p.v);
    j(1, 1) = v.f * std::cos(p.v);
    return j;
  }

  DistanceEstimate distance(const ChartPoint& p, const ChartPoint& q) const override {
    return {(ambient(p) - ambient(q)).norm(), 0.0};
  }

  Vec2 transport(const ChartPoint& p, const Vec2& w, const ChartPoint& q) const override {
    const Vec3 xi = ambient_jacobian(p) * w;
    const Mat32 j = ambient_jacobian(q);
    return (j.transpose() * j).ldlt().solve(j.transpose() * xi);
  }

  bool escaped(const ChartPoint& p) const override { return p.u > bound_; }

  UnitTangent sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const ChartPoint p{0.1 + 2.9 * unit(rng), two_pi * unit(rng), 0};
    const double alpha = two_pi * unit(rng);
    const Eigen::Matrix2d fr = orthonormal_frame(metric(p));
    return {p, std::cos(alpha) * fr.col(0) + std::sin(alpha) * fr.col(1)};
  }

 private:
  ExpBlend blend_;
  double bound_;
};

}  // namespace geoflow
