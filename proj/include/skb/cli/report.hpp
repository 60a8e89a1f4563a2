// Reports: labeled values, tolerance checks and notes, as a text table or JSON.
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "skb/bounds/estimate.hpp"

namespace skb::cli {

struct Check {
    enum class Relation { approx, at_most, at_least };
    std::string name;
    double value = 0;
    double expected = 0;
    double tolerance = 0;
    Relation relation = Relation::approx;

    bool pass() const {
        if (!std::isfinite(value)) return false;
        switch (relation) {
            case Relation::approx: return std::abs(value - expected) <= tolerance;
            case Relation::at_most: return value <= expected + tolerance;
            case Relation::at_least: return value >= expected - tolerance;
        }
        return false;
    }
};

inline const char* relation_name(Check::Relation r) {
    switch (r) {
        case Check::Relation::approx: return "approx";
        case Check::Relation::at_most: return "at-most";
        case Check::Relation::at_least: return "at-least";
    }
    return "?";
}

struct Report {
    std::string command;
    std::vector<BoundEstimate> values;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
};

inline BoundEstimate exact_value(std::string name, double v) {
    BoundEstimate e;
    e.name = std::move(name);
    e.value = v;
    e.direction = Direction::exact;
    return e;
}

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string emit_text(const Report& r) {
    std::string out = "skbounds " + r.command + "\n";
    std::size_t w = 4;
    for (const auto& v : r.values) w = std::max(w, v.name.size());
    auto pad = [](std::string s, std::size_t n) {
        if (s.size() < n) s.append(n - s.size(), ' ');
        return s;
    };
    if (!r.values.empty()) out += pad("name", w) + "  " + pad("value", 20) + "direction\n";
    for (const auto& v : r.values) {
        out += pad(v.name, w) + "  " + pad(fmt12(v.value), 20) + direction_name(v.direction) + "\n";
        if (!v.witness.empty()) out += "  witness: " + v.witness + "\n";
        if (v.bracket) out += "  bracket: [" + fmt12(v.bracket->first) + ", " + fmt12(v.bracket->second) + "]\n";
        if (v.optimizer) {
            const auto& o = *v.optimizer;
            out += "  optimizer: restarts " + std::to_string(o.restarts_run) + ", evaluations " + std::to_string(o.evaluations) +
                   ", best restart " + std::to_string(o.best_restart) + (o.converged ? ", converged" : ", not converged") + "\n";
        }
        for (const auto& [k, p] : v.parameters) out += "  " + k + " = " + fmt12(p) + "\n";
    }
    for (const auto& c : r.checks) {
        std::string rel = c.relation == Check::Relation::approx ? " ~ " : (c.relation == Check::Relation::at_most ? " <= " : " >= ");
        out += std::string(c.pass() ? "PASS  " : "FAIL  ") + c.name + ": " + fmt12(c.value) + rel + fmt12(c.expected) +
               " (tol " + fmt12(c.tolerance) + ")\n";
    }
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    return out;
}

inline nlohmann::ordered_json estimate_json(const BoundEstimate& v) {
    nlohmann::ordered_json j;
    j["name"] = v.name;
    j["value"] = v.value;
    j["direction"] = direction_name(v.direction);
    if (!v.witness.empty()) j["witness"] = v.witness;
    if (v.bracket) j["bracket"] = {v.bracket->first, v.bracket->second};
    if (!v.parameters.empty()) {
        nlohmann::ordered_json p = nlohmann::ordered_json::object();
        for (const auto& [k, x] : v.parameters) p[k] = x;
        j["parameters"] = p;
    }
    if (v.optimizer) {
        const auto& o = *v.optimizer;
        j["optimizer"] = {{"best_value", o.best_value},       {"restarts_run", o.restarts_run},
                          {"evaluations", o.evaluations},     {"converged", o.converged},
                          {"best_restart", o.best_restart},   {"restart_values", o.restart_values}};
    }
    return j;
}

// Machine form. Contains no timing data, so equal inputs give byte-identical output.
inline std::string emit_json(const Report& r) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["values"] = nlohmann::ordered_json::array();
    for (const auto& v : r.values) j["values"].push_back(estimate_json(v));
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name},
                               {"value", c.value},
                               {"expected", c.expected},
                               {"tolerance", c.tolerance},
                               {"relation", relation_name(c.relation)},
                               {"pass", c.pass()}});
    j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

inline std::string emit_report(const Report& r, bool json) { return json ? emit_json(r) : emit_text(r); }

}  // namespace skb::cli
