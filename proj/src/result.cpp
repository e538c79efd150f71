#include <algorithm>

#include "relkg/exec.hpp"
#include "relkg/graph.hpp"

namespace relkg {

nlohmann::json ResultSet::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& v : row) r.push_back(value_to_json(v));
        out.push_back(std::move(r));
    }
    return out;
}

std::string ResultSet::to_text() const {
    std::vector<std::size_t> width;
    for (const auto& c : columns) width.push_back(c.size());
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], row[i].to_display().size());
        }
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += " | ";
            s += cells[i];
            if (i + 1 < cells.size()) s.append(width[i] - cells[i].size(), ' ');
        }
        return s + "\n";
    };
    std::string out = line(columns);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    out += line(rule);
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        for (const auto& v : row) cells.push_back(v.to_display());
        out += line(cells);
    }
    out += "(" + std::to_string(rows.size()) + (rows.size() == 1 ? " row)\n" : " rows)\n");
    return out;
}

namespace {

bool same_arity(const ResultSet& a, const ResultSet& b) {
    auto arity = [](const ResultSet& r) -> std::optional<std::size_t> {
        if (!r.rows.empty()) return r.rows.front().size();
        if (!r.columns.empty()) return r.columns.size();
        return std::nullopt;
    };
    const auto x = arity(a);
    const auto y = arity(b);
    return !x || !y || *x == *y;
}

bool rows_equal(std::vector<Row> a, std::vector<Row> b, bool ordered) {
    if (a.size() != b.size()) return false;
    if (!ordered) {
        // Value's order widens int/float, so sorting lines equal numbers up.
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
    }
    return a == b;
}

}  // namespace

bool compare_results(const ResultSet& a, const ResultSet& b) {
    if (!same_arity(a, b)) return false;
    return rows_equal(a.rows, b.rows, a.ordered && b.ordered);
}

bool compare_results_null_as_zero(const ResultSet& a, const ResultSet& b) {
    if (!same_arity(a, b)) return false;
    auto zeroed = [](std::vector<Row> rows) {
        for (auto& r : rows) {
            for (auto& v : r) {
                if (v.is_null()) v = Value::integer(0);
            }
        }
        return rows;
    };
    return rows_equal(zeroed(a.rows), zeroed(b.rows), a.ordered && b.ordered);
}

}  // namespace relkg
