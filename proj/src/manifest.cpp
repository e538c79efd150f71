#include <algorithm>
#include <fstream>
#include <sstream>

#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/text.hpp"

namespace relkg {

namespace {

using nlohmann::json;

const json* first_of(const json& obj, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it != obj.end()) return &*it;
    }
    return nullptr;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Manifest parse_manifest_object(const json& doc) {
    if (!doc.is_object()) throw ManifestMismatch("manifest entry must be a JSON object");
    Manifest m;
    m.db_id = doc.value("db_id", std::string{});

    std::vector<std::string> table_names;
    if (const json* tables = first_of(doc, {"table_names_original", "tables", "table_names"})) {
        for (const auto& t : *tables) {
            if (!t.is_string()) throw ManifestMismatch("table names must be strings");
            table_names.push_back(t.get<std::string>());
            m.tables.emplace_back(t.get<std::string>(), std::vector<std::string>{});
        }
    }

    // Spider-style column index: [[table_idx, name], ...], index 0 is usually [-1, "*"].
    std::vector<std::pair<int, std::string>> columns;
    if (const json* cols = first_of(doc, {"column_names_original", "column_names"})) {
        for (const auto& c : *cols) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_string()) {
                throw ManifestMismatch("column_names entries must be [table_index, name]");
            }
            const int ti = c[0].get<int>();
            const std::string name = c[1].get<std::string>();
            columns.emplace_back(ti, name);
            if (ti >= 0) {
                if (static_cast<std::size_t>(ti) >= m.tables.size()) {
                    throw ManifestMismatch("column " + name + " refers to table index " + std::to_string(ti));
                }
                m.tables[static_cast<std::size_t>(ti)].second.push_back(name);
            }
        }
    }

    auto column_at = [&](const json& idx) -> std::pair<std::string, std::string> {
        if (!idx.is_number_integer()) throw ManifestMismatch("column index must be an integer");
        const int i = idx.get<int>();
        if (i < 0 || static_cast<std::size_t>(i) >= columns.size() || columns[static_cast<std::size_t>(i)].first < 0) {
            throw ManifestMismatch("column index " + std::to_string(i) + " out of range");
        }
        const auto& [ti, name] = columns[static_cast<std::size_t>(i)];
        return {table_names[static_cast<std::size_t>(ti)], name};
    };

    if (const json* pks = first_of(doc, {"primary_keys"})) {
        for (const auto& pk : *pks) {
            if (pk.is_object()) {
                m.primary_keys.emplace_back(pk.at("table").get<std::string>(),
                                            pk.at("columns").get<std::vector<std::string>>());
                continue;
            }
            std::vector<json> idxs;
            if (pk.is_array()) {
                idxs.assign(pk.begin(), pk.end());
            } else {
                idxs.push_back(pk);
            }
            std::string table;
            std::vector<std::string> cols;
            for (const auto& i : idxs) {
                auto [t, c] = column_at(i);
                if (!table.empty() && table != t) throw ManifestMismatch("composite primary key spans tables");
                table = t;
                cols.push_back(c);
            }
            if (!cols.empty()) m.primary_keys.emplace_back(table, cols);
        }
    }

    if (const json* fks = first_of(doc, {"foreign_keys"})) {
        for (const auto& fk : *fks) {
            if (fk.is_object()) {
                m.foreign_keys.push_back({fk.at("table").get<std::string>(), fk.at("column").get<std::string>(),
                                          fk.at("referenced_table").get<std::string>(),
                                          fk.at("referenced_column").get<std::string>()});
                continue;
            }
            if (!fk.is_array() || fk.size() != 2) throw ManifestMismatch("foreign_keys entries must be pairs");
            auto [t, c] = column_at(fk[0]);
            auto [rt, rc] = column_at(fk[1]);
            m.foreign_keys.push_back({t, c, rt, rc});
        }
    }
    return m;
}

}  // namespace

Manifest parse_manifest(const nlohmann::json& doc, std::string_view db_id) {
    if (doc.is_array()) {
        for (const auto& entry : doc) {
            if (db_id.empty() || entry.value("db_id", std::string{}) == db_id) {
                return parse_manifest_object(entry);
            }
        }
        if (doc.empty()) return Manifest{};
        throw ManifestMismatch("manifest has no entry for db_id " + std::string(db_id));
    }
    return parse_manifest_object(doc);
}

Manifest load_manifest_file(const std::filesystem::path& path, std::string_view db_id) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ManifestMismatch("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_manifest(doc, db_id);
}

RelationalDatabase apply_manifest(RelationalDatabase db, const Manifest& manifest) {
    auto table_of = [&](const std::string& name) -> Table& {
        Table* t = db.find_table(name);
        if (!t) throw ManifestMismatch("manifest table " + name + " does not exist in database");
        return *t;
    };
    auto column_of = [](const Table& t, const std::string& col) {
        auto name = t.column_name(col);
        if (!name) throw ManifestMismatch("manifest column " + t.name + "." + col + " does not exist");
        return *name;
    };

    for (const auto& [table, cols] : manifest.tables) {
        const Table& t = table_of(table);
        for (const auto& c : cols) {
            if (c != "*") column_of(t, c);
        }
    }
    for (const auto& [table, cols] : manifest.primary_keys) {
        Table& t = table_of(table);
        std::vector<std::string> pk;
        for (const auto& c : cols) pk.push_back(column_of(t, c));
        t.primary_key = std::move(pk);
    }
    for (const auto& mfk : manifest.foreign_keys) {
        Table& t = table_of(mfk.table);
        const std::string col = column_of(t, mfk.column);
        const Table& target = table_of(mfk.referenced_table);
        const std::string ref_col = column_of(target, mfk.referenced_column);
        ForeignKey fk{{col}, target.name, {ref_col}, KeyOrigin::Manifest};
        auto& fks = t.foreign_keys;
        fks.erase(std::remove_if(fks.begin(), fks.end(),
                                 [&](const ForeignKey& existing) {
                                     return existing.origin != KeyOrigin::Manifest &&
                                            existing.columns.size() == 1 && iequals(existing.columns[0], col);
                                 }),
                  fks.end());
        if (std::find(fks.begin(), fks.end(), fk) == fks.end()) fks.push_back(std::move(fk));
    }
    return db;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

RelationalDatabase load_csv_bundle(const std::filesystem::path& dir, std::string name) {
    namespace fs = std::filesystem;
    RelationalDatabase db;
    db.name = name.empty() ? dir.filename().string() : std::move(name);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto records = parse_csv(read_file(f));
        Table t;
        t.name = f.stem().string();
        if (records.empty()) throw Error("CSV file " + f.string() + " has no header row");
        for (const auto& h : records.front()) t.columns.push_back({std::string(trim(h)), TypeTag::Unknown});
        for (std::size_t r = 1; r < records.size(); ++r) {
            if (records[r].size() != t.columns.size()) {
                db.warnings.push_back(f.filename().string() + " record " + std::to_string(r) + " has " +
                                      std::to_string(records[r].size()) + " fields; skipped");
                continue;
            }
            Row row;
            for (const auto& field : records[r]) {
                row.push_back(field.empty() ? Value::null() : parse_lenient_literal(field));
            }
            t.rows.push_back(std::move(row));
        }
        db.tables.push_back(std::move(t));
    }
    const fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) db = apply_manifest(std::move(db), load_manifest_file(manifest, {}));
    return db;
}

RelationalDatabase load_database(const std::filesystem::path& path, std::string name) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        const std::string db_name = name.empty() ? path.filename().string() : name;
        const fs::path schema = path / "schema.sql";
        if (!fs::exists(schema)) return load_csv_bundle(path, db_name);
        RelationalDatabase db = load_sql_dump(read_file(schema), db_name);
        const fs::path manifest = path / "manifest.json";
        if (fs::exists(manifest)) db = apply_manifest(std::move(db), load_manifest_file(manifest, {}));
        return db;
    }
    if (!fs::exists(path)) throw Error("database path " + path.string() + " does not exist");
    return load_sql_dump(read_file(path), name.empty() ? path.stem().string() : name);
}

}  // namespace relkg
