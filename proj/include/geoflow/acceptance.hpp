#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/analysis.hpp"
#include "geoflow/report.hpp"
#include "geoflow/scenarios.hpp"

namespace geoflow {

struct AcceptanceCheck {
  std::string scenario;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<AcceptanceCheck> checks;
  double seconds = 0.0;

  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

struct AcceptanceOptions {
  /// Restrict the run to checks on this scenario.
  std::optional<std::string> scenario;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

inline std::vector<UnitTangent> random_tangents(const Surface& s, int n, std::mt19937_64& rng) {
  std::vector<UnitTangent> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(s.model().sample(rng));
  return out;
}

/// Perimeter of the ellipse with semi-axes a, b by the trapezoid rule,
/// which converges geometrically for this periodic analytic integrand.
inline double ellipse_perimeter(double a, double b, int n = 4096) {
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = two_pi * k / n;
    sum += std::hypot(a * std::sin(t), b * std::cos(t));
  }
  return sum * two_pi / n;
}

class AcceptanceRun {
 public:
  explicit AcceptanceRun(AcceptanceOptions opts) : opts_(std::move(opts)) {}

  bool wants(const std::string& scenario) const { return !opts_.scenario || *opts_.scenario == scenario; }

  std::mt19937_64 rng(int stream) const { return std::mt19937_64(opts_.seed * 1000003ULL + stream); }

  CriterionResult closed_orbits() {
    CriterionResult r{1, "every orbit closes with period 2pi on sphere and Zoll surface", {}, 0.0};
    auto run = [&](const std::string& name, int n, double tol) {
      if (!wants(name)) return;
      auto gen = rng(1);
      const Surface s = catalog(name);
      double worst = 0.0;
      for (const auto& v : random_tangents(s, n, gen))
        worst = std::max(worst, sasaki_distance(s, geodesic_flow(s, v, two_pi, 1e-9), v));
      r.checks.push_back({name, "closure", worst < tol,
                          std::to_string(n) + " tangents, max d~(phi_2pi v, v) = " + fmt(worst) + " < " + fmt(tol)});
    };
    run("sphere", 100, 1e-6);
    run("zoll", 50, 1e-4);
    return r;
  }

  CriterionResult modulus_satisfied() {
    CriterionResult r{2, "equicontinuity modulus satisfied on sphere and Zoll surface", {}, 0.0};
    for (const std::string name : {"sphere", "zoll"}) {
      if (!wants(name)) continue;
      const Surface s = catalog(name);
      ModulusOptions o;
      o.epsilon = 0.1;
      o.t_max = 100.0;
      o.random_pairs = 200;
      o.seed = opts_.seed;
      const ModulusReport rep = equicontinuity_modulus(s, o);
      bool ok = rep.verdict == Verdict::satisfied;
      std::string detail = std::string("verdict ") + to_string(rep.verdict);
      if (rep.delta) detail += ", delta " + fmt(*rep.delta);
      if (name == "sphere") {
        ok = ok && rep.delta && *rep.delta >= o.epsilon / 8.0;
        detail += " (need >= " + fmt(o.epsilon / 8.0) + ")";
      }
      r.checks.push_back({name, "modulus", ok, detail});
    }
    return r;
  }

  CriterionResult modulus_violated() {
    CriterionResult r{3, "equicontinuity violated on flat torus and ellipsoid", {}, 0.0};
    auto judge = [&](const std::string& name, const Surface& s, const ModulusOptions& o, double max_offset) {
      const ModulusReport rep = equicontinuity_modulus(s, o);
      bool ok = rep.verdict == Verdict::violated && rep.witness.has_value();
      std::string detail = std::string("verdict ") + to_string(rep.verdict);
      if (rep.witness) {
        const auto again = replay_witness(s, *rep.witness, o.epsilon, o.t_max, o);
        ok = ok && again.has_value() && rep.witness->initial_distance <= max_offset;
        detail += ", witness d0 " + fmt(rep.witness->initial_distance) + " separates by " +
                  fmt(rep.witness->separation) + " at t " + fmt(rep.witness->time) +
                  (again ? ", replay confirms" : ", replay disagrees");
      }
      r.checks.push_back({name, "modulus", ok, detail});
    };
    if (wants("flat_torus")) {
      const Surface s = catalog("flat_torus");
      ModulusOptions o;
      o.epsilon = 0.3;
      o.t_max = 1e4;
      o.random_pairs = 200;
      o.seed = opts_.seed;
      judge("flat_torus", s, o, 1.0);
    }
    if (wants("ellipsoid")) {
      // Orbits through the ellipse that contains the longest and shortest
      // axes; the smallest level offset is eps / 2^14 < 1e-5.
      const Surface s = catalog("ellipsoid");
      ModulusOptions o;
      o.epsilon = 0.1;
      o.t_max = 200.0;
      o.random_pairs = 0;
      o.levels = 14;
      o.pairs_per_anchor = 5;
      o.seed = opts_.seed;
      for (int k = 0; k < 4; ++k) o.anchors.push_back(make_unit_tangent(s, {0.4 + 0.5 * k, 0.0, 0}, Vec2(1, 0)));
      judge("ellipsoid", s, o, 1e-5);
    }
    return r;
  }

  CriterionResult recurrence() {
    CriterionResult r{4, "sphere return map near returns at even n", {}, 0.0};
    if (!wants("sphere")) return r;
    const RecurrenceProfile& prof = sphere_profile();
    const std::vector<int> expected{2, 4, 6, 8, 10};
    double worst = 0.0;
    for (double v : prof.near_values) worst = std::max(worst, v);
    const bool ok = prof.near_returns == expected && worst < 1e-5 && prof.excluded.empty();
    std::string got;
    for (int n : prof.near_returns) got += (got.empty() ? "" : ",") + std::to_string(n);
    r.checks.push_back({"sphere", "near returns", ok,
                        "n = {" + got + "}, max s_k " + fmt(worst) + ", " + std::to_string(prof.samples.size()) +
                            " samples, " + std::to_string(prof.excluded.size()) + " excluded"});
    return r;
  }

  CriterionResult census() {
    CriterionResult r{5, "sphere return map fixed points are the two boundary circles", {}, 0.0};
    if (!wants("sphere")) return r;
    const ExtendedReturnMap f(sphere_section());
    const FixedPointCensus c = fixed_point_census(f, 200, 100, 1e-4);
    const bool poles = std::all_of(c.clusters.begin(), c.clusters.end(),
                                   [](const auto& cl) { return cl.representative.is_pole(); });
    const bool ok = c.clusters.size() == 2 && poles && !c.identity_like;
    r.checks.push_back({"sphere", "census", ok,
                        std::to_string(c.clusters.size()) + " clusters" + (poles ? " at the poles" : "") + ", " +
                            std::to_string(c.hits) + " hits of " + std::to_string(c.points)});
    return r;
  }

  CriterionResult power_check() {
    CriterionResult r{6, "near returns of F^m bounded by m s_k", {}, 0.0};
    if (!wants("sphere")) return r;
    const ExtendedReturnMap f(sphere_section());
    for (int m : {2, 3}) {
      const PowerRecurrenceReport rep = power_recurrence_check(f, sphere_profile(), m);
      double worst = 0.0;
      for (const auto& e : rep.entries) worst = std::max(worst, e.measured - e.bound);
      r.checks.push_back({"sphere", "m = " + std::to_string(m), rep.passed,
                          std::to_string(rep.entries.size()) + " entries, max excess " + fmt(worst)});
    }
    return r;
  }

  CriterionResult distality() {
    CriterionResult r{7, "flat torus pairs stay apart", {}, 0.0};
    if (!wants("flat_torus")) return r;
    const Surface s = catalog("flat_torus");
    auto gen = rng(7);
    std::vector<std::pair<UnitTangent, UnitTangent>> pairs;
    while (pairs.size() < 100) {
      UnitTangent a = s.model().sample(gen), b = s.model().sample(gen);
      if (sasaki_distance(s, a, b) > 0.0) pairs.emplace_back(a, b);
    }
    const auto entries = distality_bound(s, pairs, 1e4, 20001);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) worst = std::min(worst, e.inf_estimate);
    r.checks.push_back({"flat_torus", "inf distance", worst >= 1e-4,
                        "100 pairs over |t| <= 1e4, min inf " + fmt(worst) + " >= 1e-4"});
    return r;
  }

  CriterionResult plane_oracle() {
    CriterionResult r{8, "exponential plane flow matches the closed form", {}, 0.0};
    if (!wants("plane_exp")) return r;
    const Surface s = catalog("plane_exp");
    auto gen = rng(8);
    std::uniform_real_distribution<double> time(-50.0, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const UnitTangent v = s.model().sample(gen);
      const double t = time(gen);
      const UnitTangent got = geodesic_flow(s, v, t, 1e-9);
      const auto want = oracle_flow(s, v, t);
      worst = std::max(worst, want ? d1_distance(s, got, want->tangent()) : 1e300);
    }
    r.checks.push_back({"plane_exp", "oracle", worst < 1e-6, "100 samples, |t| <= 50, max d1 " + fmt(worst)});
    return r;
  }

  CriterionResult plane_pointwise() {
    CriterionResult r{9, "exponential plane: pointwise d1 modulus, Sasaki divergence", {}, 0.0};
    if (!wants("plane_exp")) return r;
    const Surface s = catalog("plane_exp");
    const UnitTangent x = make_unit_tangent(s, {1.0, 0.0, 0}, Vec2(1, 0));
    ModulusOptions o;
    o.epsilon = 1e-2;
    o.t_max = 100.0;
    o.random_pairs = 100;
    o.pointwise = x;
    o.metric = PhaseMetric::d1;
    o.seed = opts_.seed;
    const ModulusReport rep = equicontinuity_modulus(s, o);
    r.checks.push_back({"plane_exp", "d1 pointwise", rep.verdict == Verdict::satisfied,
                        std::string("verdict ") + to_string(rep.verdict) +
                            (rep.delta ? ", delta " + fmt(*rep.delta) : std::string())});

    const auto& model = dynamic_cast<const PlaneExpModel&>(s.model());
    const Vec2 y = model.image(Vec2(1.0, 0.0));
    const Vec2 w0(1.0, 0.0);
    const Vec2 w1(std::cos(1e-3), std::sin(1e-3));
    std::optional<double> reached;
    double dist = 0.0;
    for (double t = 1.0; t <= 1e5 * (1 + 1e-12); t *= std::pow(10.0, 0.05)) {
      const auto a = oracle_geodesic_plane_exp(model.blend(), y, w0, t);
      const auto b = oracle_geodesic_plane_exp(model.blend(), y, w1, t);
      dist = base_distance(s, a.state.base, b.state.base).value;
      if (dist > 10.0) {
        reached = t;
        break;
      }
    }
    r.checks.push_back({"plane_exp", "sasaki divergence", reached.has_value(),
                        reached ? "angle 1e-3 pair reaches base distance " + fmt(dist) + " at t " + fmt(*reached)
                                : "base distance only " + fmt(dist) + " by t = 1e5"});
    return r;
  }

  CriterionResult conservation() {
    CriterionResult r{10, "conservation, composition and reversal", {}, 0.0};
    for (const std::string name : {"sphere", "ellipsoid", "zoll", "flat_torus"}) {
      if (!wants(name)) continue;
      const Surface s = catalog(name);
      auto gen = rng(10);
      double speed = 0.0;
      std::optional<double> clairaut;
      for (const auto& v : random_tangents(s, 100, gen)) {
        const Trajectory tr = integrate_trajectory(s, v, 100.0, 101, 1e-9);
        speed = std::max(speed, tr.diagnostics.max_speed_drift / 100.0);
        if (tr.diagnostics.max_clairaut_drift)
          clairaut = std::max(clairaut.value_or(0.0), *tr.diagnostics.max_clairaut_drift / 100.0);
      }
      r.checks.push_back({name, "speed drift", speed < 1e-8, "max drift per unit time " + fmt(speed)});
      if (clairaut)
        r.checks.push_back({name, "clairaut drift", *clairaut < 1e-8, "max drift per unit time " + fmt(*clairaut)});

      std::uniform_real_distribution<double> time(-10.0, 10.0);
      double comp = 0.0, rev = 0.0;
      for (const auto& v : random_tangents(s, 100, gen)) {
        const double a = time(gen), b = time(gen);
        const UnitTangent direct = geodesic_flow(s, v, a + b);
        const UnitTangent stepped = geodesic_flow(s, geodesic_flow(s, v, b), a);
        comp = std::max(comp, sasaki_distance(s, direct, stepped));
        rev = std::max(rev, sasaki_distance(s, geodesic_flow(s, geodesic_flow(s, v, b), -b), v));
      }
      r.checks.push_back({name, "composition", comp < 1e-7, "max d~ " + fmt(comp)});
      r.checks.push_back({name, "reversal", rev < 1e-7, "max d~ " + fmt(rev)});
    }
    return r;
  }

  CriterionResult ellipsoid_geodesics() {
    CriterionResult r{11, "ellipsoid has exactly three simple closed geodesics from symmetric seeds", {}, 0.0};
    if (!wants("ellipsoid")) return r;
    const Surface s = catalog("ellipsoid");
    const std::vector<UnitTangent> seeds = coordinate_plane_seeds(s);
    ShootingOptions so;
    so.period_min = 5.0;
    so.period_max = 10.0;
    const ClosedGeodesicSearch found = find_closed_geodesics(s, seeds, so);

    const ScenarioParams p;
    std::vector<double> perimeters{ellipse_perimeter(p.semi_axes[0], p.semi_axes[1]),
                                   ellipse_perimeter(p.semi_axes[0], p.semi_axes[2]),
                                   ellipse_perimeter(p.semi_axes[1], p.semi_axes[2])};
    std::vector<double> periods;
    double closure = 0.0;
    for (const auto& g : found.geodesics) {
      periods.push_back(g.period);
      closure = std::max(closure, sasaki_distance(s, geodesic_flow(s, g.initial, g.period, 1e-11), g.initial));
    }
    std::sort(periods.begin(), periods.end());
    double mismatch = periods.size() == 3 ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, periods.size()); ++i)
      mismatch = std::max(mismatch, std::abs(periods[i] - perimeters[i]));
    std::string list;
    for (double t : periods) list += (list.empty() ? "" : ", ") + fmt(t);
    r.checks.push_back({"ellipsoid", "count", found.geodesics.size() == 3,
                        std::to_string(found.geodesics.size()) + " geodesics, periods {" + list + "}"});
    r.checks.push_back({"ellipsoid", "closure", !periods.empty() && closure < 1e-6,
                        "max re-verified closure " + fmt(closure) + " < 1e-6"});
    r.checks.push_back({"ellipsoid", "principal ellipses", mismatch < 1e-5,
                        "max |period - ellipse perimeter| " + fmt(mismatch)});
    return r;
  }

 private:
  const Section& sphere_section() {
    if (!section_) section_.emplace(default_section(catalog("sphere")));
    return *section_;
  }

  const RecurrenceProfile& sphere_profile() {
    if (!profile_) {
      const Section& sec = sphere_section();
      const ExtendedReturnMap f(sec);
      profile_ = recurrence_profile(f, 10, annulus_samples(sec.length(), 50, 50, {0.02, 0.98}), 1e-5,
                                    "50 x 50 grid, rings at 0.02 and 0.98, both poles");
    }
    return *profile_;
  }

  AcceptanceOptions opts_;
  std::optional<Section> section_;
  std::optional<RecurrenceProfile> profile_;
};

}  // namespace detail

/// Runs the acceptance suite. Criteria with no check on the selected
/// scenario are left out. `on_result` sees each criterion as it finishes.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {},
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  detail::AcceptanceRun run(opts);
  using Step = CriterionResult (detail::AcceptanceRun::*)();
  const Step steps[] = {&detail::AcceptanceRun::closed_orbits,     &detail::AcceptanceRun::modulus_satisfied,
                        &detail::AcceptanceRun::modulus_violated,  &detail::AcceptanceRun::recurrence,
                        &detail::AcceptanceRun::census,            &detail::AcceptanceRun::power_check,
                        &detail::AcceptanceRun::distality,         &detail::AcceptanceRun::plane_oracle,
                        &detail::AcceptanceRun::plane_pointwise,   &detail::AcceptanceRun::conservation,
                        &detail::AcceptanceRun::ellipsoid_geodesics};
  std::vector<CriterionResult> out;
  for (Step step : steps) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = (run.*step)();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.checks.empty()) continue;
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

/// One line: PASS/FAIL, criterion number, title, then each check.
inline std::string summary_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed() ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ":";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const auto& c = r.checks[i];
    os << (i ? ";" : "") << " " << c.scenario << " " << c.name << " " << (c.passed ? "ok" : "FAILED") << " ("
       << c.detail << ")";
  }
  return os.str();
}

/// Timing is left out so reports of identical runs are identical.
inline Json to_json(const CriterionResult& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"scenario", c.scenario}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return Json{{"id", r.id}, {"title", r.title}, {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace geoflow
