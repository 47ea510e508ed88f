#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "geoflow/analysis.hpp"

namespace geoflow {

using Json = nlohmann::ordered_json;

inline constexpr int report_schema = 1;

inline Json to_json(const ChartPoint& p) { return Json{{"u", p.u}, {"v", p.v}, {"chart", p.chart}}; }

inline Json to_json(const UnitTangent& v) {
  return Json{{"base", to_json(v.base)}, {"direction", {v.direction(0), v.direction(1)}}};
}

inline Json to_json(const SectionCoord& c) { return Json{{"s", c.s}, {"theta", c.theta}}; }

inline Json to_json(const CompactifiedPoint& p) {
  switch (p.kind) {
    case CompactifiedPoint::Kind::minus_infinity: return "-inf";
    case CompactifiedPoint::Kind::plus_infinity: return "+inf";
    case CompactifiedPoint::Kind::interior: break;
  }
  return to_json(p.coord);
}

inline Json to_json(const PairWitness& w) {
  return Json{{"a", to_json(w.a)},
              {"b", to_json(w.b)},
              {"initial_distance", w.initial_distance},
              {"time", w.time},
              {"separation", w.separation}};
}

/// Fields {verdict, epsilon, delta, t_max, samples, witness?} plus the
/// per-level breakdown.
inline Json to_json(const ModulusReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta ? Json(*r.delta) : Json(nullptr);
  j["t_max"] = r.t_max;
  j["samples"] = r.samples;
  if (r.witness) j["witness"] = to_json(*r.witness);
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    Json lj{{"delta", l.delta},
            {"outcome", to_string(l.outcome)},
            {"pairs_tested", l.pairs_tested},
            {"escaped", l.escaped},
            {"max_separation", l.max_separation}};
    levels.push_back(lj);
  }
  j["levels"] = levels;
  return j;
}

inline Json to_json(const RecurrenceProfile& p) {
  Json j;
  j["samples"] = p.sample_description;
  j["sample_count"] = p.samples.size();
  Json sups = Json::array();
  for (const auto& [n, s] : p.sup_displacements) sups.push_back({{"n", n}, {"sup", s}});
  j["sup_displacements"] = sups;
  Json near = Json::array();
  for (std::size_t k = 0; k < p.near_returns.size(); ++k)
    near.push_back({{"n", p.near_returns[k]}, {"s", p.near_values[k]}});
  j["near_return_tol"] = p.near_return_tol;
  j["near_returns"] = near;
  j["excluded"] = p.excluded;
  return j;
}

inline Json to_json(const PowerRecurrenceReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"n_k", e.n_k}, {"s_k", e.s_k}, {"bound", e.bound}, {"measured", e.measured}, {"ok", e.ok}});
  return Json{{"m", r.m}, {"slack", r.slack}, {"passed", r.passed}, {"entries", entries}};
}

inline Json to_json(const FixedPointCensus& c) {
  Json clusters = Json::array();
  for (const auto& cl : c.clusters)
    clusters.push_back({{"representative", to_json(cl.representative)}, {"size", cl.size}, {"displacement", cl.displacement}});
  return Json{{"points", c.points},
              {"hits", c.hits},
              {"excluded", c.excluded},
              {"identity_like", c.identity_like},
              {"cluster_count", c.clusters.size()},
              {"clusters", clusters}};
}

inline Json to_json(const AlmostPeriodReport& r) {
  Json windows = Json::array();
  for (const auto& w : r.windows)
    windows.push_back({{"lo", w.lo}, {"hi", w.hi}, {"t", w.t}, {"value", w.value}, {"found", w.found}});
  return Json{{"epsilon", r.epsilon}, {"tau", r.tau}, {"every_window", r.every_window}, {"found", r.found}, {"windows", windows}};
}

inline Json to_json(const ClosedGeodesicSearch& s) {
  Json geos = Json::array();
  for (const auto& g : s.geodesics) geos.push_back({{"period", g.period}, {"initial", to_json(g.initial)}});
  Json seeds = Json::array();
  for (const auto& r : s.seeds)
    seeds.push_back({{"seed", r.seed_index}, {"converged", r.converged}, {"period", r.period}, {"residual", r.residual}, {"note", r.note}});
  return Json{{"count", s.geodesics.size()}, {"geodesics", geos}, {"seeds", seeds}};
}

inline Json to_json(const std::vector<DistalityEntry>& entries) {
  Json out = Json::array();
  for (const auto& e : entries)
    out.push_back({{"a", to_json(e.a)}, {"b", to_json(e.b)}, {"inf_estimate", e.inf_estimate}, {"time", e.time}});
  return out;
}

}  // namespace geoflow
