#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geoflow/analysis.hpp"
#include "geoflow/scenarios.hpp"

using namespace geoflow;

TEST(Modulus, SphereIsSatisfied) {
  const Surface s = catalog("sphere");
  ModulusOptions o;
  o.epsilon = 0.1;
  o.t_max = 30.0;
  o.random_pairs = 30;
  const ModulusReport r = equicontinuity_modulus(s, o);
  EXPECT_EQ(r.verdict, Verdict::satisfied);
  ASSERT_TRUE(r.delta.has_value());
  EXPECT_GE(*r.delta, o.epsilon / 8);
  EXPECT_FALSE(r.witness.has_value());
  EXPECT_EQ(r.levels.back().outcome, LevelOutcome::clean);
  EXPECT_LT(r.levels.back().max_separation, o.epsilon);
}

TEST(Modulus, FlatTorusIsViolatedAndWitnessReplays) {
  const Surface s = catalog("flat_torus");
  ModulusOptions o;
  o.epsilon = 0.3;
  o.t_max = 1e4;
  o.random_pairs = 20;
  o.levels = 6;
  const ModulusReport r = equicontinuity_modulus(s, o);
  EXPECT_EQ(r.verdict, Verdict::violated);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LT(r.witness->initial_distance, o.epsilon / std::pow(2.0, o.levels) * 1.0000001);
  EXPECT_GE(r.witness->separation, o.epsilon);
  EXPECT_LE(r.witness->time, o.t_max);
  // a longer horizon only adds samples
  const auto again = replay_witness(s, *r.witness, o.epsilon, 2 * o.t_max, o);
  ASSERT_TRUE(again.has_value());
  EXPECT_LE(again->t, r.witness->time + 1e-9);
}

TEST(Modulus, SameSeedSameReport) {
  const Surface s = catalog("zoll");
  ModulusOptions o;
  o.t_max = 10.0;
  o.random_pairs = 10;
  o.levels = 3;
  const ModulusReport a = equicontinuity_modulus(s, o), b = equicontinuity_modulus(s, o);
  ASSERT_EQ(a.levels.size(), b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) EXPECT_EQ(a.levels[i].max_separation, b.levels[i].max_separation);
}

TEST(Modulus, PerturbationStaysWithinDelta) {
  const Surface s = catalog("ellipsoid");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const UnitTangent a = s.model().sample(rng);
    const UnitTangent b = detail::perturb_within(s, a, 1e-3, PhaseMetric::sasaki, rng);
    const double d = sasaki_distance(s, a, b);
    EXPECT_LT(d, 1e-3);
    EXPECT_GT(d, 0.0);
  }
}

TEST(Modulus, RejectsBadOptions) {
  const Surface s = catalog("sphere");
  ModulusOptions o;
  o.epsilon = -1.0;
  EXPECT_THROW(equicontinuity_modulus(s, o), PreconditionError);
  ModulusOptions d1;
  d1.metric = PhaseMetric::d1;
  EXPECT_THROW(equicontinuity_modulus(s, d1), PreconditionError);
}

TEST(Maps, TwistAndIdentity) {
  const TwistMap f;
  const auto p = f(CompactifiedPoint::interior({0.9, 0.3}));
  EXPECT_NEAR(p.coord.s, 0.2, 1e-15);
  EXPECT_NEAR(p.coord.theta, 0.3, 0.0);
  EXPECT_TRUE(f(CompactifiedPoint::plus_infinity()).is_pole());
  const PowerMap<TwistMap> f3(f, 3);
  EXPECT_NEAR(f3(CompactifiedPoint::interior({0.0, 0.25})).coord.s, 0.75, 1e-15);
  EXPECT_THROW(PowerMap<TwistMap>(f, 0), PreconditionError);
}

TEST(Recurrence, AnnulusSampleCount) {
  EXPECT_EQ(annulus_samples(1.0, 5, 4).size(), 22u);
  EXPECT_EQ(annulus_samples(1.0, 5, 4, {0.1, 0.9}).size(), 32u);
  EXPECT_EQ(annulus_samples(1.0, 5, 4, {}, false).size(), 20u);
}

TEST(Recurrence, IdentityReturnsEverywhere) {
  const IdentityMap id(2.0);
  const auto prof = recurrence_profile(id, 5, annulus_samples(2.0, 6, 6), 1e-9);
  EXPECT_EQ(prof.near_returns, (std::vector<int>{1, 2, 3, 4, 5}));
  for (double v : prof.near_values) EXPECT_EQ(v, 0.0);
  const auto rep = power_recurrence_check(id, prof, 3);
  EXPECT_TRUE(rep.passed);
}

TEST(Recurrence, TwistNearReturnsAtDenominators) {
  // On theta = k / 4 rings the twist returns exactly after 4 steps.
  const TwistMap f;
  std::vector<CompactifiedPoint> samples;
  for (int i = 0; i < 8; ++i)
    for (int k = 1; k < 4; ++k) samples.push_back(CompactifiedPoint::interior({i / 8.0, k / 4.0}));
  const auto prof = recurrence_profile(f, 8, samples, 1e-12);
  EXPECT_EQ(prof.near_returns, (std::vector<int>{4, 8}));
  EXPECT_TRUE(power_recurrence_check(f, prof, 2).passed);
}

TEST(Census, TwistFixesOnlyThePoles) {
  const FixedPointCensus c = fixed_point_census(TwistMap{}, 40, 21, 1e-4);
  EXPECT_FALSE(c.identity_like);
  ASSERT_EQ(c.clusters.size(), 2u);
  for (const auto& cl : c.clusters) EXPECT_TRUE(cl.representative.is_pole());
  EXPECT_EQ(c.points, 40u * 19u + 2u);
}

TEST(Census, IdentityIsFlagged) {
  const FixedPointCensus c = fixed_point_census(IdentityMap(1.0), 10, 10, 1e-6);
  EXPECT_TRUE(c.identity_like);
  EXPECT_EQ(c.hits, c.points);
}

TEST(Distality, ParallelTorusOrbitsKeepTheirOffset) {
  const Surface s = catalog("flat_torus");
  const UnitTangent a{{0.1, 0.1, 0}, Vec2(0.6, 0.8)};
  const UnitTangent b{{0.1, 0.3, 0}, Vec2(0.6, 0.8)};
  const auto e = distality_bound(s, {{a, b}}, 50.0, 101);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_NEAR(e[0].inf_estimate, 0.2, 1e-9);
}

TEST(Distality, InfimumBoundedByAngle) {
  const Surface s = catalog("flat_torus");
  const UnitTangent a{{0.1, 0.1, 0}, Vec2(1.0, 0.0)};
  const UnitTangent b{{0.6, 0.2, 0}, Vec2(std::cos(0.3), std::sin(0.3))};
  const auto e = distality_bound(s, {{a, b}}, 200.0, 4001);
  EXPECT_GE(e[0].inf_estimate, 0.3 - 1e-12);
  EXPECT_LE(e[0].inf_estimate, sasaki_distance(s, a, b));
}

TEST(AlmostPeriod, SphereHasOneInEveryWindow) {
  const Surface s = catalog("sphere");
  std::mt19937_64 rng(8);
  std::vector<UnitTangent> samples;
  for (int i = 0; i < 5; ++i) samples.push_back(s.model().sample(rng));
  const AlmostPeriodReport r = almost_period_search(s, 0.05, 7.0, samples, 0.0, 30.0);
  EXPECT_TRUE(r.every_window);
  EXPECT_EQ(r.windows.size(), 4u);
  for (const auto& w : r.windows) {
    EXPECT_NEAR(std::remainder(w.t, two_pi), 0.0, 0.05);
    EXPECT_LT(w.value, 0.05);
  }
}

TEST(ClosedGeodesics, SphereSeedsCloseAtTwoPi) {
  const Surface s = catalog("sphere");
  ShootingOptions o;
  o.period_min = 4.0;
  o.period_max = 8.0;
  const auto found = find_closed_geodesics(s, {unit_tangent_at_angle(s, {1.0, 0.5, 0}, 0.7)}, o);
  ASSERT_EQ(found.geodesics.size(), 1u);
  EXPECT_NEAR(found.geodesics[0].period, two_pi, 1e-6);
}

TEST(ClosedGeodesics, EllipsoidPrincipalEllipses) {
  const Surface s = catalog("ellipsoid");
  ShootingOptions o;
  o.period_min = 5.0;
  o.period_max = 10.0;
  const auto found = find_closed_geodesics(s, coordinate_plane_seeds(s), o);
  ASSERT_EQ(found.geodesics.size(), 3u);
  for (const auto& g : found.geodesics) {
    const auto check = check_closed_geodesic(g);
    EXPECT_TRUE(check.closed);
    EXPECT_TRUE(check.simple);
  }
  EXPECT_THROW(coordinate_plane_seeds(catalog("flat_torus")), PreconditionError);
}
