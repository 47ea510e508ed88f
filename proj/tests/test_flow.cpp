#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "geoflow/scenarios.hpp"

using namespace geoflow;

namespace {

/// Ambient great circle n(t) = cos(t/r) n0 + sin(t/r) xi0 / |xi0| through
/// the start of v.
Vec3 great_circle(const Surface& s, const UnitTangent& v, double t) {
  const auto& m = s.model();
  const Vec3 n0 = m.ambient(v.base);
  const Vec3 xi = m.ambient_jacobian(v.base) * v.direction;
  return std::cos(t * xi.norm()) * n0 + std::sin(t * xi.norm()) * xi.normalized();
}

}  // namespace

TEST(Flow, SphereFollowsGreatCircles) {
  for (double r : {1.0, 2.5}) {
    const Surface s = catalog("sphere", {.radius = r});
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
      const UnitTangent v = s.model().sample(rng);
      for (double t : {0.3, 2.0, -4.5, 17.0}) {
        const UnitTangent w = geodesic_flow(s, v, t, 1e-11);
        EXPECT_LT((s.model().ambient(w.base) - great_circle(s, v, t)).norm(), 1e-8) << "r " << r << " t " << t;
      }
    }
  }
}

TEST(Flow, SphereEquatorHeadingBoundsLatitude) {
  // Leaving the equator at heading alpha, the orbit reaches latitude alpha.
  const Surface s = catalog("sphere");
  const double alpha = 0.6;
  const UnitTangent v = make_unit_tangent(s, {pi / 2, 0.0, 0}, Vec2(-std::sin(alpha), std::cos(alpha)));
  const Trajectory tr = integrate_trajectory(s, v, pi, 2001, 1e-11);
  double top = 0.0;
  for (const auto& st : tr.states) top = std::max(top, s.model().ambient(st.base).z());
  EXPECT_NEAR(std::asin(top), alpha, 1e-5);
}

TEST(Flow, FlatTorusStraightLines) {
  const Surface s = catalog("flat_torus", {.torus_periods = {1.0, 2.0}});
  const UnitTangent v{{0.2, 0.3, 0}, Vec2(0.6, 0.8)};
  const UnitTangent w = geodesic_flow(s, v, 7.3);
  EXPECT_NEAR(w.base.u, std::fmod(0.2 + 0.6 * 7.3, 1.0), 1e-12);
  EXPECT_NEAR(w.base.v, std::fmod(0.3 + 0.8 * 7.3, 2.0), 1e-12);
  EXPECT_LT((w.direction - v.direction).norm(), 1e-14);
}

TEST(Flow, ExponentialPlaneImagesAreStraightLines) {
  const Surface s = catalog("plane_exp");
  const auto& m = dynamic_cast<const PlaneExpModel&>(s.model());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const UnitTangent v = s.model().sample(rng);
    const Vec2 y0 = m.image(v.base.coords());
    const Vec2 e = m.differential(v.base.coords()) * v.direction;
    EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    for (double t : {-20.0, 3.0, 25.0}) {
      const FlowResult r = integrate_flow(s, v, t, 1e-10);
      ASSERT_FALSE(r.escaped);
      EXPECT_LT((m.image(r.state.base.coords()) - (y0 + t * e)).norm(), 1e-6 * (1.0 + std::abs(t)));
    }
  }
}

TEST(Flow, PolarChartAgreesWithCartesian) {
  const Surface cart = catalog("plane_exp");
  const Surface polar = catalog("plane_exp", {.plane_chart = "polar"});
  const ChartPoint p{1.3, 0.9, 0};
  const Vec2 x(p.u * std::cos(p.v), p.u * std::sin(p.v));
  const UnitTangent vp = make_unit_tangent(polar, p, Vec2(0.4, 1.0));
  const Vec2 dx(0.4 * std::cos(p.v) - p.u * std::sin(p.v), 0.4 * std::sin(p.v) + p.u * std::cos(p.v));
  const UnitTangent vc = make_unit_tangent(cart, ChartPoint::from(x), dx);
  const UnitTangent wp = geodesic_flow(polar, vp, 4.0, 1e-11), wc = geodesic_flow(cart, vc, 4.0, 1e-11);
  EXPECT_NEAR(wp.base.u * std::cos(wp.base.v), wc.base.u, 1e-7);
  EXPECT_NEAR(wp.base.u * std::sin(wp.base.v), wc.base.v, 1e-7);
}

TEST(Flow, PlaneEscapeIsReported) {
  const Surface s = catalog("plane_flat", {.plane_bound = 5.0});
  const FlowResult r = integrate_flow(s, {{0.0, 0.0, 0}, Vec2(1.0, 0.0)}, 100.0);
  EXPECT_TRUE(r.escaped);
  EXPECT_LT(r.time, 100.0);
  EXPECT_GT(r.time, 5.0 - 1e-9);
}

TEST(Flow, RejectsNonPositiveTolerance) {
  const Surface s = catalog("sphere");
  EXPECT_THROW(integrate_flow(s, unit_tangent_at_angle(s, {1.0, 1.0, 0}, 0.0), 1.0, 0.0), PreconditionError);
  EXPECT_THROW(integrate_trajectory(s, unit_tangent_at_angle(s, {1.0, 1.0, 0}, 0.0), -1.0, 10), PreconditionError);
}

class CompactFlow : public ::testing::TestWithParam<const char*> {};

TEST_P(CompactFlow, CompositionAndReversal) {
  const Surface s = catalog(GetParam());
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> time(-10.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    const UnitTangent v = s.model().sample(rng);
    const double a = time(rng), b = time(rng);
    EXPECT_LT(sasaki_distance(s, geodesic_flow(s, v, a + b), geodesic_flow(s, geodesic_flow(s, v, b), a)), 1e-7);
    EXPECT_LT(sasaki_distance(s, geodesic_flow(s, geodesic_flow(s, v, a), -a), v), 1e-7);
  }
}

TEST_P(CompactFlow, ConservedQuantities) {
  const Surface s = catalog(GetParam());
  std::mt19937_64 rng(22);
  for (int i = 0; i < 10; ++i) {
    const Trajectory tr = integrate_trajectory(s, s.model().sample(rng), 100.0, 201);
    EXPECT_EQ(tr.states.size(), 201u);
    EXPECT_NEAR(tr.states.back().time, 100.0, 1e-12);
    EXPECT_LT(tr.diagnostics.max_speed_drift, 1e-6);
    if (tr.diagnostics.max_clairaut_drift) EXPECT_LT(*tr.diagnostics.max_clairaut_drift, 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Catalog, CompactFlow, ::testing::Values("sphere", "ellipsoid", "zoll", "flat_torus"));

TEST(Sasaki, SymmetricAndZeroOnDiagonal) {
  std::mt19937_64 rng(9);
  for (const auto& name : scenario_names()) {
    const Surface s = catalog(name);
    for (int i = 0; i < 10; ++i) {
      const UnitTangent a = s.model().sample(rng), b = s.model().sample(rng);
      EXPECT_EQ(sasaki_distance(s, a, b), sasaki_distance(s, b, a)) << name;
      EXPECT_NEAR(sasaki_distance(s, a, a), 0.0, 1e-12) << name;
    }
  }
}

TEST(Sasaki, SameBaseGivesAngle) {
  const Surface s = catalog("zoll");
  const ChartPoint p{1.1, 2.0, 0};
  EXPECT_NEAR(sasaki_distance(s, unit_tangent_at_angle(s, p, 0.1), unit_tangent_at_angle(s, p, 0.9)), 0.8, 1e-12);
}

TEST(Sasaki, ChartIndependent) {
  const Surface s = catalog("ellipsoid");
  const UnitTangent a = unit_tangent_at_angle(s, {0.5, 1.0, 0}, 0.3), b = unit_tangent_at_angle(s, {0.7, 1.4, 0}, 1.0);
  EXPECT_NEAR(sasaki_distance(s, a, b), sasaki_distance(s, to_chart(s, a, 1), to_chart(s, b, 1)), 1e-7);
}

TEST(D1, OnlyOnCartesianPlanes) {
  const Surface plane = catalog("plane_flat");
  const UnitTangent a{{1.0, 0.0, 0}, Vec2(1.0, 0.0)}, b{{1.0, 2.0, 0}, Vec2(0.0, 1.0)};
  EXPECT_NEAR(d1_distance(plane, a, b), 2.0 + std::sqrt(2.0), 1e-15);
  const Surface sphere = catalog("sphere");
  const UnitTangent v = unit_tangent_at_angle(sphere, {1.0, 1.0, 0}, 0.0);
  EXPECT_THROW(d1_distance(sphere, v, v), PreconditionError);
}

TEST(Separation, ScanStopsAtThreshold) {
  const Surface s = catalog("flat_torus");
  const UnitTangent a{{0.0, 0.0, 0}, Vec2(1.0, 0.0)};
  const UnitTangent b{{0.0, 0.0, 0}, Vec2(std::cos(0.01), std::sin(0.01))};
  const auto samples = flow_pair_separation(s, a, b, 100.0, PhaseMetric::sasaki, 1001);
  EXPECT_NEAR(samples.front().distance, 0.01, 1e-12);
  // chord 2 t sin(0.005) between the two lines, before any wrap
  EXPECT_NEAR(samples[100].distance, 0.01 + 20.0 * std::sin(0.005), 1e-9);
  const auto stopped = detail::separation_scan(s, a, b, 100.0, PhaseMetric::sasaki, 1001, 1e-9, 0.2);
  EXPECT_GE(stopped.back().distance, 0.2);
  EXPECT_LT(stopped.size(), 1001u);
}

TEST(Trajectory, CsvExport) {
  const Surface s = catalog("sphere");
  const Trajectory tr = integrate_trajectory(s, unit_tangent_at_angle(s, {1.0, 1.0, 0}, 0.5), 1.0, 3);
  std::ostringstream os;
  write_trajectory_csv(os, s, tr);
  std::string header;
  std::istringstream in(os.str());
  std::getline(in, header);
  EXPECT_EQ(header, "t,u,v,du,dv,drift");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3);
}
