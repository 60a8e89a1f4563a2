// JSON state files.
//
//   {"kind": "density", "dims": [["A", 2], ["B", 2]], "classical": ["A"],
//    "parties": {"A": "A", "B": "B"}, "matrix": [[[re, im], ...], ...]}
//
// Large matrices may use "entries": [[i, j, re, im], ...] (nonzero entries only) in
// place of "matrix". Classical files use "kind": "classical" and
// "probs": [{"indices": [..], "p": ..}, ...]. "parties" is optional; the default gives
// the first label to Alice, the second to Bob and the rest to Eve.
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "skb/states.hpp"

namespace skb::cli {

using json = nlohmann::ordered_json;

inline constexpr std::size_t kDenseEmitCap = 16;

struct StateFile {
    enum class Kind { density, classical };
    Kind kind = Kind::density;
    DensityState density;               // kind == density
    ClassicalDistribution distribution;  // kind == classical
    PartyMap parties;

    const SubsystemLayout& layout() const { return kind == Kind::density ? density.layout() : distribution.layout(); }

    // The density operator (diagonal for classical files).
    DensityState as_density() const { return kind == Kind::density ? density : from_distribution(distribution); }
    SharedState shared() const { return {as_density(), parties}; }
};

namespace detail {

inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw usage_error("state file: " + what + " must be a number");
    return j.get<double>();
}

inline cplx complex_entry(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw usage_error("state file: " + what + " must be [re, im]");
    return {number(j[0], what), number(j[1], what)};
}

inline std::size_t index_value(const json& j, const std::string& what) {
    if (!j.is_number_unsigned()) throw usage_error("state file: " + what + " must be a non-negative integer");
    return j.get<std::size_t>();
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline StateFile parse_state_file(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw usage_error(std::string("state file: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw usage_error("state file: top level must be an object");
    if (!doc.contains("kind") || !doc["kind"].is_string()) throw usage_error("state file: missing \"kind\"");
    if (!doc.contains("dims") || !doc["dims"].is_array() || doc["dims"].empty())
        throw usage_error("state file: missing \"dims\"");

    std::vector<std::string> labels;
    std::vector<std::size_t> dims;
    for (const auto& d : doc["dims"]) {
        if (!d.is_array() || d.size() != 2 || !d[0].is_string())
            throw usage_error("state file: each dims entry must be [label, dimension]");
        labels.push_back(d[0].get<std::string>());
        dims.push_back(detail::index_value(d[1], "dimension"));
        if (dims.back() == 0) throw usage_error("state file: dimension of '" + labels.back() + "' is 0");
    }
    SubsystemLayout layout;
    try {
        layout = SubsystemLayout(labels, dims);
    } catch (const usage_error& e) {
        throw usage_error(std::string("state file: ") + e.what());
    }

    StateFile sf;
    sf.parties = default_parties(layout);
    if (doc.contains("parties")) {
        if (!doc["parties"].is_object()) throw usage_error("state file: \"parties\" must be an object");
        PartyMap pm;
        for (const auto& [label, party] : doc["parties"].items()) {
            if (!layout.contains(label)) throw usage_error("state file: party given for unknown label '" + label + "'");
            if (!party.is_string()) throw usage_error("state file: party of '" + label + "' must be a string");
            pm[label] = parse_party(party.get<std::string>());
        }
        for (const auto& l : labels)
            if (!pm.count(l)) throw usage_error("state file: no party for '" + l + "'");
        sf.parties = std::move(pm);
    }

    const auto kind = doc["kind"].get<std::string>();
    const std::size_t n = layout.total_dim();
    if (kind == "classical") {
        sf.kind = StateFile::Kind::classical;
        if (!doc.contains("probs") || !doc["probs"].is_array()) throw usage_error("state file: missing \"probs\"");
        std::vector<double> p(n, 0.0);
        for (const auto& e : doc["probs"]) {
            if (!e.is_object() || !e.contains("indices") || !e.contains("p") || !e["indices"].is_array())
                throw usage_error("state file: each probs entry needs \"indices\" and \"p\"");
            if (e["indices"].size() != dims.size()) throw usage_error("state file: probs indices have the wrong length");
            std::size_t idx = 0;
            for (std::size_t k = 0; k < dims.size(); ++k) {
                const auto v = detail::index_value(e["indices"][k], "index");
                if (v >= dims[k]) throw usage_error("state file: index out of range for '" + labels[k] + "'");
                idx = idx * dims[k] + v;
            }
            p[idx] += detail::number(e["p"], "p");
        }
        sf.distribution = ClassicalDistribution(layout, std::move(p));
        return sf;
    }
    if (kind != "density") throw usage_error("state file: unknown kind '" + kind + "'");

    std::vector<std::string> classical;
    if (doc.contains("classical")) {
        if (!doc["classical"].is_array()) throw usage_error("state file: \"classical\" must be a list of labels");
        for (const auto& c : doc["classical"]) {
            if (!c.is_string() || !layout.contains(c.get<std::string>()))
                throw usage_error("state file: unknown classical label");
            classical.push_back(c.get<std::string>());
        }
    }
    ComplexMatrix m(n, n);
    if (doc.contains("matrix")) {
        const auto& rows = doc["matrix"];
        if (!rows.is_array() || rows.size() != n) throw usage_error("state file: matrix must have " + std::to_string(n) + " rows");
        for (std::size_t i = 0; i < n; ++i) {
            if (!rows[i].is_array() || rows[i].size() != n)
                throw usage_error("state file: matrix row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
            for (std::size_t j = 0; j < n; ++j) m(i, j) = detail::complex_entry(rows[i][j], "matrix entry");
        }
    } else if (doc.contains("entries")) {
        if (!doc["entries"].is_array()) throw usage_error("state file: \"entries\" must be a list");
        for (const auto& e : doc["entries"]) {
            if (!e.is_array() || e.size() != 4) throw usage_error("state file: each entry must be [i, j, re, im]");
            const auto i = detail::index_value(e[0], "row"), j = detail::index_value(e[1], "column");
            if (i >= n || j >= n) throw usage_error("state file: entry index out of range");
            m(i, j) = {detail::number(e[2], "entry"), detail::number(e[3], "entry")};
        }
    } else {
        throw usage_error("state file: density files need \"matrix\" or \"entries\"");
    }
    sf.kind = StateFile::Kind::density;
    sf.density = DensityState(layout, std::move(m), std::move(classical));
    return sf;
}

inline StateFile read_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open state file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_state_file(ss.str());
}

inline json state_file_json(const StateFile& sf) {
    json doc;
    const auto& layout = sf.layout();
    doc["kind"] = sf.kind == StateFile::Kind::density ? "density" : "classical";
    json dims = json::array();
    for (std::size_t i = 0; i < layout.size(); ++i) dims.push_back(json::array({layout.labels()[i], layout.dims()[i]}));
    doc["dims"] = dims;
    json parties = json::object();
    for (const auto& l : layout.labels()) parties[l] = party_name(sf.parties.at(l));
    doc["parties"] = parties;
    if (sf.kind == StateFile::Kind::classical) {
        json probs = json::array();
        const auto& p = sf.distribution;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p.probs()[i] == 0.0) continue;
            probs.push_back({{"indices", p.digits(i)}, {"p", p.probs()[i]}});
        }
        doc["probs"] = probs;
        return doc;
    }
    doc["classical"] = sf.density.classical();
    const auto& m = sf.density.matrix();
    const std::size_t n = m.rows();
    if (n <= kDenseEmitCap) {
        json rows = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < n; ++j) row.push_back(detail::complex_json(m(i, j)));
            rows.push_back(row);
        }
        doc["matrix"] = rows;
    } else {
        json entries = json::array();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (m(i, j) != cplx(0)) entries.push_back(json::array({i, j, m(i, j).real(), m(i, j).imag()}));
        doc["entries"] = entries;
    }
    return doc;
}

// One top-level key per line and one row, entry or probability per line. Doubles are
// written in shortest round-trip form, so parse(emit(s)) reproduces s bit for bit.
inline std::string emit_state_file(const StateFile& sf) {
    const auto doc = state_file_json(sf);
    std::string out = "{\n";
    std::size_t k = 0;
    for (const auto& [key, value] : doc.items()) {
        out += "  " + json(key).dump() + ": ";
        const bool listed = value.is_array() && !value.empty() && key != "classical";
        if (listed) {
            out += "[\n";
            for (std::size_t i = 0; i < value.size(); ++i) out += "    " + value[i].dump() + (i + 1 < value.size() ? ",\n" : "\n");
            out += "  ]";
        } else {
            out += value.dump();
        }
        out += ++k < doc.size() ? ",\n" : "\n";
    }
    return out + "}\n";
}

inline StateFile density_file(DensityState rho, PartyMap parties = {}) {
    StateFile sf;
    sf.kind = StateFile::Kind::density;
    if (parties.empty()) parties = default_parties(rho.layout());
    sf.density = std::move(rho);
    sf.parties = std::move(parties);
    return sf;
}

inline StateFile classical_file(ClassicalDistribution p, PartyMap parties = {}) {
    StateFile sf;
    sf.kind = StateFile::Kind::classical;
    if (parties.empty()) parties = default_parties(p.layout());
    sf.distribution = std::move(p);
    sf.parties = std::move(parties);
    return sf;
}

}  // namespace skb::cli
