#pragma once

// JSON views of the report types. Kept apart from the numerical headers so
// those do not pull in the JSON library.

#include <cstdint>
#include <string>

#include "json.hpp"

#include "bomber/engine.hpp"
#include "bomber/mc.hpp"
#include "bomber/policy.hpp"
#include "bomber/props.hpp"

namespace bomber {

using Json = nlohmann::ordered_json;

inline Json to_json(const SolveReport& r) {
    Json j;
    j["init"] = to_string(r.init);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["deltas"] = r.deltas;
    j["empirical_rate"] = r.empirical_rate;
    j["sandwich_gap"] = r.sandwich_gap ? Json(*r.sandwich_gap) : Json(nullptr);
    if (!r.gaps.empty()) j["gaps"] = r.gaps;
    j["warnings"] = r.warnings;
    j["note"] = "sandwich_gap bounds the iteration error relative to the grid fixed point only";
    return j;
}

inline Json to_json(const Tp2Report& r, const std::string& check = "tp2") {
    return Json{{"check", check},
                {"holds", r.holds},
                {"worst", r.worst_minor},
                {"location", {{"i", r.i}, {"j", r.j}, {"i2", r.i2}, {"j2", r.j2}}},
                {"tol", r.tol}};
}

inline Json to_json(const ColumnShapeReport& r, const std::string& check) {
    return Json{{"check", check},
                {"holds", r.holds},
                {"worst", r.worst},
                {"location", {{"i", r.i}, {"j", r.j}}},
                {"tol", r.tol}};
}

inline Json to_json(const BoundsReport& r) {
    return Json{{"check", "bounds"},
                {"holds", r.holds},
                {"worst", r.worst_excess},
                {"location", {{"i", r.i}, {"j", r.j}}},
                {"tol", r.slack}};
}

inline Json to_json(const MonotonicityReport& r) {
    Json v = Json::array();
    for (const auto& x : r.violations) {
        v.push_back({{"i", x.i}, {"j", x.j}, {"cells", x.cells}, {"excused", x.excused}});
    }
    return Json{{"conjecture", to_string(r.conjecture)},
                {"holds", r.holds},
                {"worst_cells", r.worst_cells},
                {"tie_slack", r.tie_slack},
                {"violations", std::move(v)}};
}

inline Json to_json(const SimResult& r, const SimConfig& cfg) {
    return Json{{"estimate", r.estimate}, {"std_err", r.std_err}, {"n_paths", r.n_paths},
                {"seed", cfg.seed},       {"x0", cfg.x0},           {"t0", cfg.t0}};
}

inline Json to_json(const SuiteReport& r) {
    Json out{{"check", "property_suite"}, {"seed", r.seed}, {"trials", r.trials}, {"holds", r.passed()}};
    Json items = Json::array();
    for (const auto& o : r.outcomes) {
        items.push_back({{"name", o.name},
                         {"trials", o.trials},
                         {"failures", o.failures},
                         {"oracle_disagreements", o.oracle_disagreements},
                         {"first_failure", o.first_failure}});
    }
    out["properties"] = std::move(items);
    return out;
}

}  // namespace bomber
