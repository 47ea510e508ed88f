#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/acceptance.hpp"
#include "geoflow/analysis.hpp"
#include "geoflow/config.hpp"
#include "geoflow/report.hpp"
#include "geoflow/scenarios.hpp"

namespace geoflow::cli {

/// What a command produced: the verdict, the JSON report fields and a CSV
/// rendering of its main table.
struct Outcome {
  std::string verdict;
  Json fields = Json::object();
  Json result = Json::object();
  std::function<void(std::ostream&)> csv;
  std::string summary;
  /// Exit with status 1 regardless of --expect (failed acceptance).
  bool failed = false;
};

namespace detail {

inline std::string fmt(double x) { return geoflow::detail::fmt(x); }

inline std::vector<double> split_numbers(const std::string& key, const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(x)) Settings::fail(key, "malformed entry '" + text + "'");
    out.push_back(x);
  }
  return out;
}

inline UnitTangent tangent_from(const Surface& surface, const std::string& key, const std::string& text, char sep) {
  const auto x = split_numbers(key, text, sep);
  if (x.size() != 3) Settings::fail(key, "expected u" + std::string(1, sep) + "v" + sep + "heading");
  return unit_tangent_at_angle(surface, surface.normalize({x[0], x[1], 0}), x[2]);
}

inline UnitTangent start_tangent(const Surface& surface, const Settings& cfg, std::mt19937_64& rng) {
  if (cfg.text("start").empty()) return surface.model().sample(rng);
  return tangent_from(surface, "start", cfg.text("start"), ',');
}

inline std::vector<UnitTangent> random_tangents(const Surface& surface, long n, std::mt19937_64& rng) {
  std::vector<UnitTangent> out;
  for (long i = 0; i < n; ++i) out.push_back(surface.model().sample(rng));
  return out;
}

inline PhaseMetric metric_of(const Settings& cfg) {
  return cfg.choice("metric", {"sasaki", "d1"}) == "d1" ? PhaseMetric::d1 : PhaseMetric::sasaki;
}

inline SectionOptions section_options(const Settings& cfg) {
  SectionOptions o;
  o.horizon = cfg.positive("horizon");
  return o;
}

inline void csv_row(std::ostream&) {}

template <class T, class... Rest>
void csv_row(std::ostream& os, const T& first, const Rest&... rest) {
  os << first;
  if constexpr (sizeof...(rest) > 0) {
    os << ',';
    csv_row(os, rest...);
  } else {
    os << '\n';
  }
}

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

/// Runs `body` with the map selected by the `map` key: the extended return
/// map of the default section or the model twist map.
template <class Body>
void with_map(const Surface& surface, const Settings& cfg, Body&& body) {
  if (cfg.choice("map", {"return", "twist"}) == "twist") {
    body(TwistMap{});
    return;
  }
  const Section section = default_section(surface, section_options(cfg));
  body(ExtendedReturnMap(section));
}

// ---------------------------------------------------------------------------
// commands

inline Outcome run_integrate(const Surface& surface, const Settings& cfg) {
  std::mt19937_64 rng(cfg.integer("seed"));
  const UnitTangent v = start_tangent(surface, cfg, rng);
  const double t_max = cfg.positive("t_max");
  const long n = cfg.count("samples", 2);
  const Trajectory traj = integrate_trajectory(surface, v, t_max, static_cast<int>(n), cfg.positive("tol"));
  const auto& d = traj.diagnostics;
  Outcome o;
  o.verdict = d.escaped ? "escaped" : "ok";
  o.fields = {{"t_max", t_max}, {"samples", n}};
  Json states = Json::array();
  for (const auto& s : traj.states)
    states.push_back({s.time, s.base.u, s.base.v, s.base.chart, s.velocity(0), s.velocity(1)});
  o.result = {{"start", to_json(v)},
              {"max_speed_drift", d.max_speed_drift},
              {"max_clairaut_drift", d.max_clairaut_drift ? Json(*d.max_clairaut_drift) : Json(nullptr)},
              {"renormalizations", d.renormalizations},
              {"escaped", d.escaped},
              {"columns", {"t", "u", "v", "chart", "du", "dv"}},
              {"states", states}};
  o.csv = [surface, traj](std::ostream& os) { write_trajectory_csv(os, surface, traj); };
  o.summary = std::to_string(traj.states.size()) + " states, max speed drift " + fmt(d.max_speed_drift);
  return o;
}

inline Outcome run_section(const Surface& surface, const Settings& cfg) {
  const Section section = default_section(surface, section_options(cfg));
  const long n = cfg.count("samples");
  const long grid_theta = cfg.count("grid_theta", 0);
  std::vector<ReturnRow> rows;
  if (grid_theta > 0) {
    rows = return_map_grid(section, static_cast<int>(n), static_cast<int>(grid_theta));
  } else {
    rows = section_orbit(section, {cfg.number("s"), cfg.number("theta")}, static_cast<int>(n));
  }
  Outcome o;
  o.verdict = "ok";
  o.fields = {{"samples", rows.size()}};
  Json table = Json::array();
  for (const auto& r : rows) table.push_back({r.from.s, r.from.theta, r.to.s, r.to.theta, r.return_time});
  o.result = {{"length", section.length()},
              {"mode", grid_theta > 0 ? "grid" : "orbit"},
              {"columns", {"s", "theta", "s_next", "theta_next", "return_time"}},
              {"rows", table}};
  o.csv = [rows](std::ostream& os) { write_section_csv(os, rows); };
  o.summary = std::to_string(rows.size()) + " returns, section length " + fmt(section.length());
  return o;
}

inline Outcome run_equicont(const Surface& surface, const Settings& cfg) {
  ModulusOptions mo;
  mo.epsilon = cfg.positive("epsilon");
  mo.t_max = cfg.positive("t_max");
  mo.levels = static_cast<int>(cfg.count("levels"));
  mo.time_step = cfg.positive("time_step");
  mo.metric = metric_of(cfg);
  mo.tol = cfg.positive("tol");
  mo.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  mo.random_pairs = static_cast<int>(cfg.count("samples"));
  if (cfg.flag("pointwise")) {
    if (cfg.text("start").empty()) Settings::fail("start", "pointwise mode needs a start tangent");
    std::mt19937_64 rng(mo.seed);
    mo.pointwise = start_tangent(surface, cfg, rng);
  } else if (!cfg.text("anchors").empty()) {
    std::stringstream ss(cfg.text("anchors"));
    std::string item;
    while (std::getline(ss, item, ';'))
      if (!trim(item).empty()) mo.anchors.push_back(tangent_from(surface, "anchors", trim(item), ':'));
    mo.pairs_per_anchor = static_cast<int>(cfg.count("pairs_per_anchor"));
    if (!cfg.is_explicit("samples")) mo.random_pairs = 0;
  }
  const ModulusReport rep = equicontinuity_modulus(surface, mo);
  Outcome o;
  o.verdict = to_string(rep.verdict);
  const Json full = to_json(rep);
  for (const char* key : {"epsilon", "delta", "t_max", "samples", "witness"})
    if (full.contains(key)) o.fields[key] = full[key];
  o.result = {{"metric", to_string(mo.metric)}, {"levels", full["levels"]}};
  o.csv = [rep](std::ostream& os) {
    os.precision(17);
    os << "delta,outcome,pairs_tested,escaped,max_separation\n";
    for (const auto& l : rep.levels) csv_row(os, l.delta, to_string(l.outcome), l.pairs_tested, l.escaped, l.max_separation);
  };
  o.summary = "epsilon " + fmt(rep.epsilon) + (rep.delta ? ", delta " + fmt(*rep.delta) : std::string()) +
              (rep.witness ? ", witness separates at t " + fmt(rep.witness->time) : std::string());
  return o;
}

inline Outcome run_recur(const Surface& surface, const Settings& cfg) {
  const long n_max = cfg.count("n_max");
  const long grid = cfg.count("samples");
  const double near_tol = cfg.positive("near_tol");
  const long m = cfg.count("power", 0);
  std::vector<double> rings = cfg.list("rings");
  for (double r : rings)
    if (!(r > 0.0 && r < 1.0)) Settings::fail("rings", "ring levels must lie in (0, 1)");
  Outcome o;
  with_map(surface, cfg, [&](const auto& map) {
    const auto samples = annulus_samples(map.length(), static_cast<int>(grid), static_cast<int>(grid), rings);
    const RecurrenceProfile prof = recurrence_profile(map, static_cast<int>(n_max), samples, near_tol,
                                                      std::to_string(grid) + " x " + std::to_string(grid) +
                                                          " grid, " + std::to_string(rings.size()) + " rings, poles");
    const Json full = to_json(prof);
    o.verdict = prof.near_returns.empty() ? "not_recurrent" : "recurrent";
    o.fields = {{"samples", samples.size()}, {"near_returns", full["near_returns"]}};
    o.result = full;
    if (m > 0 && !prof.near_returns.empty()) {
      const PowerRecurrenceReport rep = power_recurrence_check(map, prof, static_cast<int>(m));
      o.result["power_check"] = to_json(rep);
      if (!rep.passed) o.verdict = "power_check_failed";
    }
    o.csv = [prof](std::ostream& os) {
      os.precision(17);
      os << "n,sup_displacement,near_return\n";
      for (const auto& [n, s] : prof.sup_displacements)
        csv_row(os, n, s, std::find(prof.near_returns.begin(), prof.near_returns.end(), n) != prof.near_returns.end());
    };
    std::string near;
    for (int n : prof.near_returns) near += (near.empty() ? "" : ",") + std::to_string(n);
    o.summary = "near returns {" + near + "} over " + std::to_string(samples.size()) + " samples";
  });
  return o;
}

inline Outcome run_distal(const Surface& surface, const Settings& cfg) {
  std::mt19937_64 rng(cfg.integer("seed"));
  const long n = cfg.count("samples");
  const double t_max = cfg.positive("t_max");
  const double threshold = cfg.positive("distal_threshold");
  std::vector<std::pair<UnitTangent, UnitTangent>> pairs;
  while (static_cast<long>(pairs.size()) < n) {
    UnitTangent a = surface.model().sample(rng), b = surface.model().sample(rng);
    if (sasaki_distance(surface, a, b) > 0.0) pairs.emplace_back(a, b);
  }
  const auto entries = distality_bound(surface, pairs, t_max, static_cast<int>(cfg.count("time_samples", 3)),
                                       metric_of(cfg), cfg.positive("tol"));
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) worst = std::min(worst, e.inf_estimate);
  Outcome o;
  o.verdict = worst >= threshold ? "distal" : "not_distal";
  o.fields = {{"t_max", t_max}, {"samples", n}};
  o.result = {{"threshold", threshold}, {"min_inf_estimate", worst}, {"pairs", to_json(entries)}};
  o.csv = [entries](std::ostream& os) {
    os.precision(17);
    os << "pair,inf_estimate,time\n";
    for (std::size_t i = 0; i < entries.size(); ++i) csv_row(os, i, entries[i].inf_estimate, entries[i].time);
  };
  o.summary = "min inf distance " + fmt(worst) + " over " + std::to_string(n) + " pairs";
  return o;
}

inline Outcome run_almost_period(const Surface& surface, const Settings& cfg) {
  std::mt19937_64 rng(cfg.integer("seed"));
  const auto samples = random_tangents(surface, cfg.count("samples"), rng);
  const double epsilon = cfg.positive("epsilon");
  const double t_max = cfg.positive("t_max");
  const AlmostPeriodReport rep = almost_period_search(surface, epsilon, cfg.positive("tau"), samples,
                                                      cfg.number("t_min"), t_max, cfg.positive("grid_step"),
                                                      cfg.positive("tol"));
  Outcome o;
  o.verdict = rep.every_window ? "every_window" : "gaps";
  o.fields = {{"epsilon", epsilon}, {"t_max", t_max}, {"samples", samples.size()}};
  o.result = to_json(rep);
  o.csv = [rep](std::ostream& os) {
    os.precision(17);
    os << "lo,hi,t,value,found\n";
    for (const auto& w : rep.windows) csv_row(os, w.lo, w.hi, w.t, w.value, w.found);
  };
  o.summary = std::to_string(rep.found.size()) + " of " + std::to_string(rep.windows.size()) +
              " windows contain an almost period";
  return o;
}

inline Outcome run_find_geodesics(const Surface& surface, const Settings& cfg) {
  std::vector<UnitTangent> seeds;
  if (cfg.choice("seeds", {"random", "symmetric"}) == "symmetric") {
    seeds = coordinate_plane_seeds(surface);
  } else {
    std::mt19937_64 rng(cfg.integer("seed"));
    seeds = random_tangents(surface, cfg.count("samples"), rng);
  }
  ShootingOptions so;
  so.period_min = cfg.positive("period_min");
  so.period_max = cfg.positive("period_max");
  const ClosedGeodesicSearch found = find_closed_geodesics(surface, seeds, so);
  Outcome o;
  o.verdict = found.geodesics.empty() ? "none" : "found";
  o.fields = {{"samples", seeds.size()}};
  o.result = to_json(found);
  o.csv = [found](std::ostream& os) {
    os.precision(17);
    os << "index,period,u,v,chart,du,dv\n";
    for (std::size_t i = 0; i < found.geodesics.size(); ++i) {
      const auto& v = found.geodesics[i].initial;
      csv_row(os, i, found.geodesics[i].period, v.base.u, v.base.v, v.base.chart, v.direction(0), v.direction(1));
    }
  };
  std::string periods;
  for (const auto& g : found.geodesics) periods += (periods.empty() ? "" : ", ") + fmt(g.period);
  o.summary = std::to_string(found.geodesics.size()) + " closed geodesics, periods {" + periods + "}";
  return o;
}

inline Outcome run_census(const Surface& surface, const Settings& cfg) {
  const long n_s = cfg.count("samples");
  const long n_theta = cfg.count("grid_theta", 3);
  const long k = cfg.count("iterate");
  const double tol = cfg.positive("census_tol");
  Outcome o;
  with_map(surface, cfg, [&](const auto& map) {
    const auto census = [&](const auto& f) { return fixed_point_census(f, static_cast<int>(n_s), static_cast<int>(n_theta), tol); };
    const FixedPointCensus c = k == 1 ? census(map) : census(PowerMap(map, static_cast<int>(k)));
    o.verdict = c.identity_like ? "identity_like" : "isolated";
    o.fields = {{"samples", c.points}};
    o.result = to_json(c);
    o.result["iterate"] = k;
    o.csv = [c](std::ostream& os) {
      os.precision(17);
      os << "kind,s,theta,size,displacement\n";
      for (const auto& cl : c.clusters) {
        const auto& p = cl.representative;
        const char* kind = p.kind == CompactifiedPoint::Kind::interior        ? "interior"
                           : p.kind == CompactifiedPoint::Kind::minus_infinity ? "-inf"
                                                                               : "+inf";
        csv_row(os, kind, p.coord.s, p.coord.theta, cl.size, cl.displacement);
      }
    };
    o.summary = std::to_string(c.clusters.size()) + " fixed-point clusters, " + std::to_string(c.hits) + " hits of " +
                std::to_string(c.points);
  });
  return o;
}

inline Outcome run_oracle_check(const Surface& surface, const Settings& cfg) {
  if (surface.kind() == SurfaceKind::ellipsoid || surface.kind() == SurfaceKind::zoll)
    throw PreconditionError("cli", "scenario '" + surface.name() + "' has no closed-form flow");
  std::mt19937_64 rng(cfg.integer("seed"));
  const long n = cfg.count("samples");
  const double t_max = cfg.positive("t_max");
  const double limit = cfg.positive("oracle_tol");
  const PhaseMetric metric = surface.cartesian_plane() ? PhaseMetric::d1 : PhaseMetric::sasaki;
  std::uniform_real_distribution<double> time(-t_max, t_max);
  struct Row {
    double t;
    double deviation;
    bool escaped;
  };
  std::vector<Row> rows;
  double worst = 0.0;
  long escaped = 0;
  for (long i = 0; i < n; ++i) {
    const UnitTangent v = surface.model().sample(rng);
    const double t = time(rng);
    const FlowResult got = integrate_flow(surface, v, t, cfg.positive("tol"));
    const auto want = oracle_flow(surface, v, t);
    if (got.escaped || !want) {
      ++escaped;
      rows.push_back({t, 0.0, true});
      continue;
    }
    const double dev = phase_distance(surface, metric, got.state, want->tangent());
    worst = std::max(worst, dev);
    rows.push_back({t, dev, false});
  }
  Outcome o;
  o.verdict = worst < limit ? "pass" : "fail";
  o.fields = {{"t_max", t_max}, {"samples", n}};
  o.result = {{"metric", to_string(metric)}, {"max_deviation", worst}, {"limit", limit}, {"escaped", escaped}};
  o.csv = [rows](std::ostream& os) {
    os.precision(17);
    os << "sample,t,deviation,escaped\n";
    for (std::size_t i = 0; i < rows.size(); ++i) csv_row(os, i, rows[i].t, rows[i].deviation, rows[i].escaped);
  };
  o.summary = "max " + std::string(to_string(metric)) + " deviation " + fmt(worst) + " (limit " + fmt(limit) + ")";
  return o;
}

inline Outcome run_accept(const Settings& cfg, std::ostream& progress) {
  AcceptanceOptions ao;
  if (cfg.is_explicit("scenario")) ao.scenario = cfg.text("scenario");
  ao.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  const auto results = run_acceptance(ao, [&](const CriterionResult& r) { progress << summary_line(r) << '\n'; });
  const long failing = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed(); });
  Outcome o;
  o.verdict = failing == 0 && !results.empty() ? "pass" : "fail";
  o.failed = o.verdict == "fail";
  Json criteria = Json::array();
  for (const auto& r : results) criteria.push_back(to_json(r));
  o.fields = {{"samples", results.size()}};
  o.result = {{"failing", failing}, {"criteria", criteria}};
  o.csv = [results](std::ostream& os) {
    os << "criterion,scenario,check,passed,detail\n";
    for (const auto& r : results)
      for (const auto& c : r.checks) csv_row(os, r.id, c.scenario, c.name, c.passed, quoted(c.detail));
  };
  o.summary = std::to_string(results.size() - failing) + " of " + std::to_string(results.size()) + " criteria pass";
  return o;
}

}  // namespace detail

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"integrate", "section", "analyze", "find-geodesics",
                                              "census", "oracle-check", "accept"};
  return names;
}

/// Runs the command line `args` (without the program name). Returns the
/// process exit status: 0 on success, 1 when the verdict differs from
/// `expect` or acceptance fails, 2 on any error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical experiments on geodesic flows of surfaces", "geoflow"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::string scenario, seed, tol, t_max, samples, out, format, expect;
    std::string kind;
  } flags;

  std::vector<std::pair<CLI::Option*, std::string>> flag_keys;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value settings file");
    sub->add_option("--set", flags.sets, "override any setting as key=value");
    const std::pair<const char*, std::string*> named[] = {
        {"scenario", &flags.scenario}, {"seed", &flags.seed},     {"tol", &flags.tol},
        {"t_max", &flags.t_max},       {"samples", &flags.samples}, {"out", &flags.out},
        {"format", &flags.format},     {"expect", &flags.expect}};
    for (const auto& [key, target] : named) {
      std::string name = std::string("--") + key;
      std::replace(name.begin(), name.end(), '_', '-');
      const auto& spec = *std::find_if(setting_specs().begin(), setting_specs().end(),
                                       [&](const SettingSpec& s) { return s.key == key; });
      flag_keys.emplace_back(sub->add_option(name, *target, spec.help), key);
    }
  };

  for (const auto& name : commands()) {
    CLI::App* sub = app.add_subcommand(name, name == "analyze" ? "run an estimator" : "");
    if (name == "analyze")
      sub->add_option("kind", flags.kind, "equicont, recur, distal or almostperiod")
          ->required()
          ->check(CLI::IsMember({"equicont", "recur", "distal", "almostperiod"}));
    add_common(sub);
  }
  app.get_subcommand("integrate")->description("integrate one orbit and export the trajectory");
  app.get_subcommand("section")->description("iterate the return map of the default section");
  app.get_subcommand("find-geodesics")->description("shoot for simple closed geodesics");
  app.get_subcommand("census")->description("fixed points of the extended return map");
  app.get_subcommand("oracle-check")->description("compare the integrator with the closed-form flow");
  app.get_subcommand("accept")->description("run the acceptance suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "geoflow: [cli] " << e.what() << '\n';
    return 2;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  const std::string experiment = command == "analyze" ? flags.kind : command;

  try {
    Settings cfg(command_defaults(experiment));
    if (!flags.config.empty())
      for (const auto& [k, v] : load_config_file(flags.config)) cfg.set(k, v);
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("cli", "--set expects key=value, got '" + kv + "'");
      cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    for (const auto& [opt, key] : flag_keys)
      if (opt->count() > 0) cfg.set(key, opt->as<std::string>());

    const std::string format = cfg.choice("format", {"json", "csv"});
    cfg.integer("seed");
    cfg.positive("tol");

    Outcome outcome;
    const bool to_stdout = cfg.text("out").empty();
    std::ostream& chatter = to_stdout ? err : out;
    if (command == "accept") {
      outcome = detail::run_accept(cfg, chatter);
    } else {
      const Surface surface = catalog(cfg.text("scenario"), cfg.scenario_params());
      if (experiment == "integrate") outcome = detail::run_integrate(surface, cfg);
      else if (experiment == "section") outcome = detail::run_section(surface, cfg);
      else if (experiment == "equicont") outcome = detail::run_equicont(surface, cfg);
      else if (experiment == "recur") outcome = detail::run_recur(surface, cfg);
      else if (experiment == "distal") outcome = detail::run_distal(surface, cfg);
      else if (experiment == "almostperiod") outcome = detail::run_almost_period(surface, cfg);
      else if (experiment == "find-geodesics") outcome = detail::run_find_geodesics(surface, cfg);
      else if (experiment == "census") outcome = detail::run_census(surface, cfg);
      else if (experiment == "oracle-check") outcome = detail::run_oracle_check(surface, cfg);
    }

    Json report;
    report["schema"] = report_schema;
    report["command"] = experiment;
    report["scenario"] = command == "accept" && !cfg.is_explicit("scenario") ? Json("all") : Json(cfg.text("scenario"));
    report["verdict"] = outcome.verdict;
    for (const char* key : {"epsilon", "delta", "t_max", "samples"})
      report[key] = outcome.fields.contains(key) ? outcome.fields[key] : Json(nullptr);
    for (const char* key : {"witness", "near_returns"})
      if (outcome.fields.contains(key)) report[key] = outcome.fields[key];
    report["result"] = outcome.result;
    report["config"] = cfg.values();

    auto write = [&](std::ostream& os) {
      if (format == "csv") outcome.csv(os);
      else os << report.dump(2) << '\n';
    };
    if (to_stdout) {
      write(out);
    } else {
      std::ofstream file(cfg.text("out"));
      if (!file) throw ConfigError("cli", "cannot write output file '" + cfg.text("out") + "'");
      write(file);
    }
    chatter << experiment << " " << report["scenario"].get<std::string>() << ": " << outcome.verdict << " ("
            << outcome.summary << ")\n";

    const std::string& expect = cfg.text("expect");
    if (!expect.empty() && expect != outcome.verdict) {
      err << "geoflow: expected verdict '" << expect << "', got '" << outcome.verdict << "'\n";
      return 1;
    }
    return outcome.failed ? 1 : 0;
  } catch (const Error& e) {
    err << "geoflow: [" << e.module() << "] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "geoflow: [" << experiment << "] " << e.what() << '\n';
    return 2;
  }
}

}  // namespace geoflow::cli
