#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "relkg/eval.hpp"
#include "relkg/exec.hpp"
#include "relkg/graph.hpp"
#include "relkg/loaders.hpp"
#include "relkg/workload.hpp"

namespace fixtures {

inline std::filesystem::path dir(const std::string& name) { return std::filesystem::path(RELKG_FIXTURES) / name; }

inline std::string read(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline relkg::RelationalDatabase database(const std::string& name) { return relkg::load_database(dir(name), name); }

inline relkg::Workload workload(const std::string& name) {
    return relkg::load_workload(dir(name) / "workload.jsonl", relkg::WorkloadFormat::Jsonl);
}

inline std::vector<std::string> workload_sql(const std::string& name) {
    std::vector<std::string> out;
    for (const auto& it : workload(name).items) out.push_back(it.sql);
    return out;
}

/// Full pipeline, using the fixture's own workload for key inference.
inline relkg::Migration migrate(const std::string& name, std::optional<std::string> domain = std::nullopt) {
    relkg::MigrationOptions o;
    o.workload = workload_sql(name);
    o.repairs.domain = std::move(domain);
    return relkg::migrate(database(name), o);
}

/// Hand-computed answers keyed by workload index.
inline std::map<std::size_t, relkg::ResultSet> answers(const std::string& name,
                                                       const std::string& file = "answers.jsonl") {
    std::map<std::size_t, relkg::ResultSet> out;
    std::istringstream in(read(dir(name) / "expected" / file));
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        relkg::ResultSet r;
        r.ordered = j.value("ordered", false);
        for (const auto& row : j.at("rows")) {
            relkg::Row vals;
            for (const auto& v : row) vals.push_back(relkg::value_from_json(v));
            r.rows.push_back(std::move(vals));
        }
        out[j.at("query").get<std::size_t>()] = std::move(r);
    }
    return out;
}

inline nlohmann::json stats(const std::string& name) { return nlohmann::json::parse(read(dir(name) / "expected" / "stats.json")); }

/// True when g's node/edge totals and per-label/per-type counts equal the
/// hand-computed expectation.
inline bool stats_match(const relkg::GraphStats& s, const nlohmann::json& want) {
    if (s.node_count != want.at("node_count").get<std::size_t>()) return false;
    if (s.edge_count != want.at("edge_count").get<std::size_t>()) return false;
    return s.label_counts == want.at("label_counts").get<std::map<std::string, std::size_t>>() &&
           s.type_counts == want.at("type_counts").get<std::map<std::string, std::size_t>>();
}

inline const char* const all[] = {"college_3",  "department_management", "singer",   "concert_singer",
                                  "assets_maintenance", "musical",       "state_code"};

}  // namespace fixtures
