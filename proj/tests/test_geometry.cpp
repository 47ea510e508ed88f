#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "geoflow/scenarios.hpp"

using namespace geoflow;

namespace {

/// Pullback of the Euclidean metric under an embedding X(u, v), by central
/// differences.
template <class Embedding>
Mat2 pullback(Embedding&& x, double u, double v) {
  const double h = 1e-6;
  const Vec3 xu = (x(u + h, v) - x(u - h, v)) / (2 * h);
  const Vec3 xv = (x(u, v + h) - x(u, v - h)) / (2 * h);
  Mat2 g;
  g << xu.dot(xu), xu.dot(xv), xv.dot(xu), xv.dot(xv);
  return g;
}

std::vector<ChartPoint> interior_points() {
  return {{0.7, 0.3, 0}, {1.2, 2.5, 0}, {2.0, 4.0, 0}, {1.5707, 5.9, 0}, {2.6, 1.1, 0}};
}

}  // namespace

TEST(Metric, RoundSphereClosedForm) {
  const Surface s = catalog("sphere", {.radius = 2.0});
  for (const auto& p : interior_points()) {
    const Mat2 g = metric_at(s, p);
    EXPECT_NEAR(g(0, 0), 4.0, 1e-12);
    EXPECT_NEAR(g(1, 1), 4.0 * std::sin(p.u) * std::sin(p.u), 1e-12);
    EXPECT_NEAR(g(0, 1), 0.0, 1e-12);
  }
}

TEST(Metric, EllipsoidIsEmbeddingPullback) {
  const Surface s = catalog("ellipsoid");
  auto x = [](double th, double ph) {
    return Vec3(1.0 * std::sin(th) * std::cos(ph), 1.2 * std::sin(th) * std::sin(ph), 1.5 * std::cos(th));
  };
  for (const auto& p : interior_points()) {
    const Mat2 want = pullback(x, p.u, p.v);
    const Mat2 got = metric_at(s, p);
    EXPECT_LT((want - got).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Metric, ZollMeridianStretch) {
  // g = (1 + lambda p(cos theta))^2 dtheta^2 + sin^2 theta dphi^2
  const double lambda = 0.3;
  const Surface s = catalog("zoll", {.zoll_lambda = lambda});
  for (const auto& p : interior_points()) {
    const double z = std::cos(p.u);
    const double stretch = 1.0 + lambda * z * (1.0 - z * z);
    const Mat2 g = metric_at(s, p);
    EXPECT_NEAR(g(0, 0), stretch * stretch, 1e-12);
    EXPECT_NEAR(g(1, 1), std::sin(p.u) * std::sin(p.u), 1e-12);
    EXPECT_NEAR(g(0, 1), 0.0, 1e-12);
  }
}

TEST(Metric, ExponentialPlaneIsImagePullback) {
  const Surface s = catalog("plane_exp");
  const auto& m = dynamic_cast<const PlaneExpModel&>(s.model());
  auto x = [&](double u, double v) {
    const Vec2 y = m.image(Vec2(u, v));
    return Vec3(y(0), y(1), 0.0);
  };
  for (const ChartPoint p : {ChartPoint{0.1, 0.2, 0}, ChartPoint{0.6, -0.3, 0}, ChartPoint{-1.5, 2.0, 0},
                             ChartPoint{3.0, 1.0, 0}}) {
    const Mat2 want = pullback(x, p.u, p.v);
    const Mat2 got = metric_at(s, p);
    EXPECT_LT((want - got).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + want.cwiseAbs().maxCoeff()));
  }
}

TEST(Christoffel, RoundSphereClosedForm) {
  const Surface s = catalog("sphere");
  for (const auto& p : interior_points()) {
    const Christoffel c = christoffel(s, p);
    EXPECT_NEAR(c(0, 1, 1), -std::sin(p.u) * std::cos(p.u), 1e-12);
    EXPECT_NEAR(c(1, 0, 1), std::cos(p.u) / std::sin(p.u), 1e-12);
    EXPECT_NEAR(c(1, 1, 0), std::cos(p.u) / std::sin(p.u), 1e-12);
    EXPECT_NEAR(c(0, 0, 0), 0.0, 1e-12);
    EXPECT_NEAR(c(1, 1, 1), 0.0, 1e-12);
  }
}

TEST(Christoffel, AnalyticMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (const auto& name : scenario_names()) {
    const Surface s = catalog(name);
    for (int n = 0; n < 20; ++n) {
      const ChartPoint p = s.model().sample(rng).base;
      const Christoffel a = christoffel(s, p), b = christoffel_fd(s, p);
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            EXPECT_NEAR(a(k, i, j), b(k, i, j), 1e-5 * (1.0 + std::abs(a(k, i, j))))
                << name << " at " << p.u << ", " << p.v;
    }
  }
}

TEST(Charts, ChangeOfChartPreservesPointAndLength) {
  const Surface s = catalog("zoll");
  const auto& m = s.model();
  for (const auto& p : interior_points()) {
    const Vec2 w(0.3, -0.8);
    const auto [q, wq] = change_chart(m, p, w, 1);
    EXPECT_EQ(q.chart, 1);
    EXPECT_LT((m.ambient(p) - m.ambient(q)).norm(), 1e-12);
    EXPECT_NEAR(g_norm(s, p, w), g_norm(s, q, wq), 1e-10);
    EXPECT_LT((m.ambient_jacobian(p) * w - m.ambient_jacobian(q) * wq).norm(), 1e-10);
  }
}

TEST(Surface, NormalizeWrapsPeriodicAxesAndRejectsOthers) {
  const Surface torus = catalog("flat_torus", {.torus_periods = {2.0, 3.0}});
  const ChartPoint p = torus.normalize({-0.5, 7.0, 0});
  EXPECT_NEAR(p.u, 1.5, 1e-15);
  EXPECT_NEAR(p.v, 1.0, 1e-15);
  const Surface sphere = catalog("sphere");
  EXPECT_NEAR(sphere.normalize({1.0, -0.5, 0}).v, two_pi - 0.5, 1e-15);
  EXPECT_THROW(sphere.normalize({4.0, 0.0, 0}), DomainError);
}

TEST(Tangents, UnitAndAngleConstruction) {
  const Surface s = catalog("ellipsoid");
  const ChartPoint p{1.0, 2.0, 0};
  const UnitTangent v = make_unit_tangent(s, p, Vec2(3.0, -1.0));
  EXPECT_NEAR(g_norm(s, p, v.direction), 1.0, 1e-14);
  const UnitTangent a = unit_tangent_at_angle(s, p, 0.4), b = unit_tangent_at_angle(s, p, 1.1);
  EXPECT_NEAR(angle_between(s, a, b), 0.7, 1e-12);
  EXPECT_THROW(make_unit_tangent(s, p, Vec2::Zero()), PreconditionError);
}

TEST(Distance, RoundSphereGreatCircle) {
  const Surface s = catalog("sphere", {.radius = 3.0});
  const auto& m = s.model();
  const ChartPoint p{0.4, 1.0, 0}, q{2.2, 4.0, 0};
  const double want = 3.0 * std::acos(m.ambient(p).dot(m.ambient(q)));
  const DistanceEstimate d = base_distance(s, p, q);
  EXPECT_NEAR(d.value, want, 1e-12);
  EXPECT_EQ(d.error_bound, 0.0);
}

TEST(Distance, FlatTorusLatticeMinimum) {
  const Surface s = catalog("flat_torus", {.torus_periods = {1.0, 2.0}});
  const ChartPoint p{0.1, 0.2, 0}, q{0.95, 1.9, 0};
  double want = 1e9;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) want = std::min(want, std::hypot(0.85 + i, 1.7 + 2.0 * j));
  EXPECT_NEAR(base_distance(s, p, q).value, want, 1e-14);
}

TEST(Distance, ExponentialPlaneIsImageDistance) {
  const Surface s = catalog("plane_exp");
  const auto& m = dynamic_cast<const PlaneExpModel&>(s.model());
  const ChartPoint p{0.3, -0.2, 0}, q{-2.0, 1.5, 0};
  const double want = (m.image(p.coords()) - m.image(q.coords())).norm();
  EXPECT_NEAR(base_distance(s, p, q).value, want, 1e-12);
}

TEST(Distance, EllipsoidBoundsBracketChord) {
  const Surface s = catalog("ellipsoid");
  const auto& m = s.model();
  const ChartPoint p{0.5, 0.2, 0}, q{2.0, 3.5, 0};
  const DistanceEstimate d = base_distance(s, p, q);
  const Vec3 ax(1.0, 1.2, 1.5);
  const double chord = (ax.cwiseProduct(m.ambient(p)) - ax.cwiseProduct(m.ambient(q))).norm();
  EXPECT_GE(d.value, chord);
  EXPECT_NEAR(d.value - d.error_bound, chord, 1e-12);
}

TEST(Transport, LatitudeHolonomy) {
  // Parallel transport once around the circle theta = theta0 rotates
  // vectors by 2 pi cos(theta0).
  const Surface s = catalog("sphere");
  const double theta0 = 1.0;
  std::vector<ChartPoint> loop;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) loop.push_back({theta0, std::fmod(two_pi * i / n, two_pi), 0});
  const Vec2 w0(1.0, 0.0);
  const Vec2 w1 = parallel_transport(s, loop, w0);
  const Mat2 g = metric_at(s, loop.front());
  EXPECT_NEAR(std::sqrt(g_inner(g, w1, w1)), 1.0, 1e-8);
  const double turned = std::atan2(std::sin(theta0) * w1(1), w1(0));
  const double want = std::remainder(-two_pi * std::cos(theta0), two_pi);
  EXPECT_NEAR(std::remainder(turned - want, two_pi), 0.0, 1e-6);
}

TEST(Transport, RoundSphereClosedFormPreservesAngles) {
  const Surface s = catalog("sphere");
  const ChartPoint p{0.8, 0.4, 0}, q{2.1, 3.0, 0};
  const Vec2 a = unit_tangent_at_angle(s, p, 0.2).direction, b = unit_tangent_at_angle(s, p, 1.3).direction;
  const Vec2 ta = s.model().transport(p, a, q), tb = s.model().transport(p, b, q);
  EXPECT_NEAR(g_angle(metric_at(s, q), ta, tb), 1.1, 1e-12);
  EXPECT_NEAR(g_norm(s, q, ta), 1.0, 1e-12);
}
