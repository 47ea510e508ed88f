#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "geoflow/section.hpp"
#include "geoflow/scenarios.hpp"

using namespace geoflow;

namespace {

double circle_gap(double a, double b, double length) { return std::abs(std::remainder(a - b, length)); }

}  // namespace

TEST(ClosedGeodesic, EquatorIsClosedAndSimple) {
  const Surface s = catalog("sphere");
  const auto gamma = make_closed_geodesic(s, make_unit_tangent(s, {pi / 2, 0.0, 0}, Vec2(0, 1)), two_pi);
  const auto check = check_closed_geodesic(gamma);
  EXPECT_TRUE(check.closed);
  EXPECT_TRUE(check.simple);
  EXPECT_LT(check.closure, 1e-8);
}

TEST(ClosedGeodesic, WrongPeriodIsRejected) {
  const Surface s = catalog("sphere");
  const UnitTangent v = make_unit_tangent(s, {pi / 2, 0.0, 0}, Vec2(0, 1));
  EXPECT_FALSE(check_closed_geodesic(make_closed_geodesic(s, v, 5.0)).closed);
  EXPECT_THROW(section_through(s, v, 5.0), PreconditionError);
  // twice around closes but is not simple
  const auto twice = check_closed_geodesic(make_closed_geodesic(s, v, 2 * two_pi));
  EXPECT_TRUE(twice.closed);
  EXPECT_FALSE(twice.simple);
}

TEST(Section, SphereReturnIsHalfTurn) {
  const Surface s = catalog("sphere");
  const Section sec = default_section(s);
  EXPECT_EQ(sec.kind(), Section::Kind::plane);
  EXPECT_NEAR(sec.length(), two_pi, 1e-9);
  for (double s0 : {0.0, 1.0, 4.0}) {
    for (double th : {0.05, 0.3, 0.5, 0.77, 0.95}) {
      const ReturnResult r = return_map(sec, {s0, th});
      EXPECT_NEAR(circle_gap(r.coord.s, s0 + pi, two_pi), 0.0, 1e-8) << s0 << " " << th;
      EXPECT_NEAR(r.coord.theta, th, 1e-8);
      EXPECT_NEAR(r.time, pi, 1e-8);
      EXPECT_FALSE(r.tangency_warning);
    }
  }
}

TEST(Section, SphereReturnTimesAndCounts) {
  const Section sec = default_section(catalog("sphere"));
  const SectionCoord c{0.5, 0.3};
  EXPECT_NEAR(return_time_n(sec, c, 2), two_pi, 1e-8);
  EXPECT_EQ(return_time_n(sec, c, 0), 0.0);
  EXPECT_EQ(crossing_count(sec, c, 3.5), 1);
  EXPECT_EQ(crossing_count(sec, c, 3.0), 0);
  for (int n : {1, 3, 5}) EXPECT_EQ(crossing_count(sec, c, return_time_n(sec, c, n)), n);
  EXPECT_NEAR(min_return_gap(sec, 0.2, 0.8, 10.0, 8), pi, 1e-8);
}

TEST(Section, FlatTorusReturnIsTwist) {
  // From the u axis at angle pi theta the orbit returns after 1 / sin(pi
  // theta), shifted by cot(pi theta).
  const Surface s = catalog("flat_torus");
  const Section sec = default_section(s);
  EXPECT_EQ(sec.kind(), Section::Kind::line);
  EXPECT_NEAR(sec.length(), 1.0, 1e-12);
  for (double s0 : {0.0, 0.3, 0.8}) {
    for (double th : {0.1, 0.25, 0.5, 0.6, 0.9}) {
      const ReturnResult r = return_map(sec, {s0, th});
      EXPECT_NEAR(circle_gap(r.coord.s, s0 + 1.0 / std::tan(pi * th), 1.0), 0.0, 1e-8) << s0 << " " << th;
      EXPECT_NEAR(r.coord.theta, th, 1e-8);
      EXPECT_NEAR(r.time, 1.0 / std::sin(pi * th), 1e-8);
    }
  }
}

TEST(Section, EllipsoidEquatorLengthIsPerimeter) {
  const Section sec = default_section(catalog("ellipsoid"));
  double sum = 0.0;
  const int n = 4096;
  for (int k = 0; k < n; ++k) sum += std::hypot(1.0 * std::sin(two_pi * k / n), 1.2 * std::cos(two_pi * k / n));
  EXPECT_NEAR(sec.length(), sum * two_pi / n, 1e-9);
  // Reversing the velocity and reflecting through the equator plane gives
  // R(s, theta) = (s, 1 - theta), and F R F = R.
  const SectionCoord c{1.0, 0.4};
  const ReturnResult r1 = return_map(sec, c);
  const ReturnResult r2 = return_map(sec, {r1.coord.s, 1.0 - r1.coord.theta});
  EXPECT_NEAR(circle_gap(r2.coord.s, c.s, sec.length()), 0.0, 1e-7);
  EXPECT_NEAR(r2.coord.theta, 1.0 - c.theta, 1e-7);
  EXPECT_NEAR(r2.time, r1.time, 1e-7);
}

TEST(Section, CoordinateRoundTrip) {
  for (const char* name : {"sphere", "ellipsoid", "zoll", "flat_torus"}) {
    const Section sec = default_section(catalog(name));
    for (double th : {0.02, 0.4, 0.97}) {
      const SectionCoord c{0.37 * sec.length(), th};
      int side = 0;
      const SectionCoord back = sec.to_coord(sec.to_tangent(c), &side);
      EXPECT_NEAR(back.s, c.s, 1e-9) << name;
      EXPECT_NEAR(back.theta, th, 1e-9) << name;
      EXPECT_EQ(side, 1) << name;
    }
  }
}

TEST(Section, ZollCurveSection) {
  // A tilted closed geodesic of the Zoll surface is not planar in the
  // unit-sphere picture, so its section uses the curve kind.
  const Surface s = catalog("zoll");
  const Section sec = section_through(s, unit_tangent_at_angle(s, {pi / 2, 0.0, 0}, 0.8), two_pi);
  EXPECT_EQ(sec.kind(), Section::Kind::curve);
  EXPECT_NEAR(sec.length(), two_pi, 1e-9);
  for (double th : {0.2, 0.5, 0.8}) {
    const SectionCoord c{1.0, th};
    const SectionCoord back = sec.to_coord(sec.to_tangent(c));
    EXPECT_NEAR(back.s, c.s, 1e-8);
    EXPECT_NEAR(back.theta, c.theta, 1e-8);
    const ReturnResult r = return_map(sec, c);
    EXPECT_GT(r.time, 0.0);
    EXPECT_LE(r.time, two_pi + 1e-9);
  }
}

TEST(Section, TangencyGuardAndHorizon) {
  const Section sec = default_section(catalog("sphere"));
  EXPECT_THROW(return_map(sec, {0.0, 0.005}), PreconditionError);
  EXPECT_THROW(return_map(sec, {0.0, 0.999}), PreconditionError);
  SectionOptions short_horizon;
  short_horizon.horizon = 1.0;
  const Section hurried = default_section(catalog("sphere"), short_horizon);
  try {
    return_map(hurried, {0.0, 0.5});
    FAIL() << "expected HorizonError";
  } catch (const HorizonError& e) {
    EXPECT_TRUE(e.partial().empty());
    EXPECT_NEAR(e.last_state().time, 1.0, 1e-12);
  }
}

TEST(Section, RejectsNoncompactSurfaces) {
  EXPECT_THROW(default_section(catalog("plane_flat")), PreconditionError);
}

TEST(Compactification, EmbeddingRoundTripAndPoles) {
  const double length = 3.0;
  for (double s : {0.0, 0.7, 2.9})
    for (double th : {0.01, 0.5, 0.99}) {
      const auto p = compactify({s, th});
      const auto q = from_embedding(embed(p, length), length);
      EXPECT_FALSE(q.is_pole());
      EXPECT_NEAR(circle_gap(q.coord.s, s, length), 0.0, 1e-12);
      EXPECT_NEAR(q.coord.theta, th, 1e-12);
    }
  EXPECT_EQ(compactify({1.0, 0.0}).kind, CompactifiedPoint::Kind::minus_infinity);
  EXPECT_EQ(compactify({1.0, 1.0}).kind, CompactifiedPoint::Kind::plus_infinity);
  EXPECT_NEAR(embed(CompactifiedPoint::minus_infinity(), length).z(), 1.0, 0.0);
  EXPECT_NEAR(compactified_distance(CompactifiedPoint::minus_infinity(), CompactifiedPoint::plus_infinity(), length),
              2.0, 1e-15);
  // points near theta = 0 approach the minus pole
  EXPECT_LT(compactified_distance(compactify({2.0, 1e-6}), CompactifiedPoint::minus_infinity(), length), 1e-5);
}

TEST(Compactification, ExtendedMapFixesPoles) {
  const Section sec = default_section(catalog("sphere"));
  const ExtendedReturnMap f(sec);
  EXPECT_EQ(f(CompactifiedPoint::plus_infinity()).kind, CompactifiedPoint::Kind::plus_infinity);
  EXPECT_EQ(f(CompactifiedPoint::minus_infinity()).kind, CompactifiedPoint::Kind::minus_infinity);
  const auto x = CompactifiedPoint::interior({1.0, 0.3});
  EXPECT_LT(f.distance(f(f(x)), x), 1e-8);
}

TEST(Export, GridAndOrbitCsv) {
  const Section sec = default_section(catalog("flat_torus"));
  const auto grid = return_map_grid(sec, 3, 4);
  EXPECT_EQ(grid.size(), 12u);
  const auto orbit = section_orbit(sec, {0.0, 0.25}, 3);
  ASSERT_EQ(orbit.size(), 3u);
  EXPECT_NEAR(circle_gap(orbit[1].from.s, 0.0, 1.0), 0.0, 1e-8);
  std::ostringstream os;
  write_section_csv(os, orbit);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "s,theta,s_next,theta_next,return_time");
}
