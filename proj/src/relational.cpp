#include "relkg/relational.hpp"

#include <algorithm>

#include "relkg/text.hpp"

namespace relkg {

std::string_view to_string(TypeTag t) {
    switch (t) {
        case TypeTag::Int: return "int";
        case TypeTag::Real: return "real";
        case TypeTag::Text: return "text";
        case TypeTag::Unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(KeyOrigin o) {
    switch (o) {
        case KeyOrigin::Declared: return "declared";
        case KeyOrigin::Manifest: return "manifest";
        case KeyOrigin::Inferred: return "inferred";
    }
    return "declared";
}

std::string_view to_string(TableKind k) {
    return k == TableKind::Entity ? "entity" : "linking";
}

std::string_view to_string(ClassReason r) {
    switch (r) {
        case ClassReason::NoForeignKeys: return "no_foreign_keys";
        case ClassReason::ForeignKeyCountNotTwo: return "foreign_key_count_not_two";
        case ClassReason::TwoForeignKeysSinglePk: return "two_foreign_keys_single_pk";
        case ClassReason::TwoForeignKeysNoSinglePk: return "two_foreign_keys_no_single_pk";
    }
    return "";
}

std::optional<std::size_t> Table::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (iequals(columns[i].name, column)) return i;
    }
    return std::nullopt;
}

std::optional<std::string> Table::column_name(std::string_view column) const {
    if (auto i = column_index(column)) return columns[*i].name;
    return std::nullopt;
}

std::vector<std::string> Table::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.name);
    return out;
}

const Table* RelationalDatabase::find_table(std::string_view table) const {
    for (const auto& t : tables) {
        if (iequals(t.name, table)) return &t;
    }
    return nullptr;
}

Table* RelationalDatabase::find_table(std::string_view table) {
    for (auto& t : tables) {
        if (iequals(t.name, table)) return &t;
    }
    return nullptr;
}

RelationalDatabase merge_databases(const std::vector<RelationalDatabase>& dbs, std::string name) {
    RelationalDatabase out;
    out.name = std::move(name);
    for (const auto& db : dbs) {
        for (const auto& w : db.warnings) out.warnings.push_back(w);
        for (const auto& src : db.tables) {
            Table* dst = out.find_table(src.name);
            if (!dst) {
                out.tables.push_back(src);
                continue;
            }
            for (const auto& c : src.columns) {
                if (!dst->has_column(c.name)) {
                    dst->columns.push_back(c);
                    for (auto& row : dst->rows) row.emplace_back();
                }
            }
            for (const auto& row : src.rows) {
                Row merged(dst->columns.size());
                for (std::size_t i = 0; i < src.columns.size(); ++i) {
                    merged[*dst->column_index(src.columns[i].name)] = row[i];
                }
                dst->rows.push_back(std::move(merged));
            }
            for (const auto& fk : src.foreign_keys) {
                if (std::find(dst->foreign_keys.begin(), dst->foreign_keys.end(), fk) ==
                    dst->foreign_keys.end()) {
                    dst->foreign_keys.push_back(fk);
                }
            }
            if (dst->primary_key.empty()) dst->primary_key = src.primary_key;
            dst->placeholder = dst->placeholder && src.placeholder;
        }
    }
    return out;
}

TableClassification classify_tables(const RelationalDatabase& db) {
    TableClassification out;
    out.tables.reserve(db.tables.size());
    for (const auto& t : db.tables) {
        TableClass c;
        c.table = t.name;
        c.columns = t.column_names();
        c.primary_key = t.primary_key;
        c.foreign_keys = t.foreign_keys;
        const std::size_t fk = t.foreign_keys.size();
        const std::size_t pk = t.primary_key.size();
        if (is_linking_table(fk, pk)) {
            c.kind = TableKind::Linking;
            c.reason = ClassReason::TwoForeignKeysNoSinglePk;
        } else {
            c.kind = TableKind::Entity;
            if (fk == 0) {
                c.reason = ClassReason::NoForeignKeys;
            } else if (fk != 2) {
                c.reason = ClassReason::ForeignKeyCountNotTwo;
            } else {
                c.reason = ClassReason::TwoForeignKeysSinglePk;
            }
        }
        out.tables.push_back(std::move(c));
    }
    return out;
}

const TableClass* TableClassification::find(std::string_view table) const {
    for (const auto& t : tables) {
        if (iequals(t.table, table)) return &t;
    }
    return nullptr;
}

std::string has_edge_type(std::string_view referenced_table, std::string_view owning_table) {
    // Namespaced tables share their domain prefix; keep it once.
    const auto dot_ref = referenced_table.rfind('.');
    const auto dot_own = owning_table.rfind('.');
    if (dot_ref != std::string_view::npos && dot_own != std::string_view::npos &&
        referenced_table.substr(0, dot_ref) == owning_table.substr(0, dot_own)) {
        owning_table.remove_prefix(dot_own + 1);
    }
    std::string out(referenced_table);
    out += "_HAS_";
    out += owning_table;
    return out;
}

}  // namespace relkg
