#include "relkg/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "relkg/binding.hpp"
#include "relkg/cypher.hpp"
#include "relkg/errors.hpp"
#include "relkg/eval.hpp"
#include "relkg/loaders.hpp"
#include "relkg/sql2cypher.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/workload.hpp"

namespace relkg {

namespace {

namespace fs = std::filesystem;

struct RepairToggles {
    bool no_fk = false;
    bool no_pk = false;
    bool no_normalize = false;

    RepairOptions options(std::optional<std::string> domain) const {
        RepairOptions o;
        o.infer_foreign_keys = !no_fk;
        o.infer_primary_keys = !no_pk;
        o.normalize_content = !no_normalize;
        o.domain = std::move(domain);
        return o;
    }
};

void add_repair_flags(CLI::App* cmd, RepairToggles& t) {
    cmd->add_flag("--no-fk-inference", t.no_fk, "Skip foreign-key inference and retargeting");
    cmd->add_flag("--no-pk-inference", t.no_pk, "Skip primary-key inference");
    cmd->add_flag("--no-normalize", t.no_normalize, "Skip duplicate removal and empty-table placeholders");
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot read " + p.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

std::string read_all(std::istream& in) {
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Database id of an input path: the directory name, or the file stem.
std::string db_name(const fs::path& p) {
    fs::path q = p;
    if (!q.has_filename()) q = q.parent_path();
    return fs::is_directory(q) ? q.filename().string() : q.stem().string();
}

WorkloadFormat workload_format_for(const std::string& flag, const fs::path& path) {
    if (!flag.empty()) return parse_workload_format(flag);
    return path.extension() == ".jsonl" || path.extension() == ".json" ? WorkloadFormat::Jsonl : WorkloadFormat::Plain;
}

std::vector<std::string> sql_for(const Workload& w, const std::string& db_id) {
    std::vector<std::string> out;
    for (const auto& it : w.items) {
        if (it.db_id == db_id || it.db_id.empty()) out.push_back(it.sql);
    }
    return out;
}

std::string paint(const CliEnv& env, const std::string& text, bool good) {
    if (!env.color) return text;
    return (good ? "\x1b[32m" : "\x1b[31m") + text + "\x1b[0m";
}

/// Repair each input, optionally under its own namespace, then merge and
/// migrate the union. A single input keeps its own name.
Migration migrate_inputs(const std::vector<std::string>& inputs, const std::optional<std::string>& domain,
                         bool namespace_each, const RepairToggles& toggles, const Workload& workload) {
    if (inputs.size() == 1) {
        const std::string name = db_name(inputs[0]);
        MigrationOptions o;
        o.repairs = toggles.options(domain ? domain : (namespace_each ? std::optional(name) : std::nullopt));
        o.workload = sql_for(workload, name);
        return migrate(load_database(inputs[0], name), o);
    }
    std::vector<RelationalDatabase> originals;
    std::vector<RelationalDatabase> repaired;
    RepairLog log;
    for (const auto& in : inputs) {
        const std::string name = db_name(in);
        originals.push_back(load_database(in, name));
        auto [db, l] = run_repairs(originals.back(), toggles.options(namespace_each ? std::optional(name) : std::nullopt),
                                   sql_for(workload, name));
        repaired.push_back(std::move(db));
        log.append(l);
    }
    MigrationOptions o;
    o.repairs.infer_foreign_keys = false;
    o.repairs.infer_primary_keys = false;
    o.repairs.normalize_content = false;
    Migration m = migrate(merge_databases(repaired, "merged"), o);
    m.original = merge_databases(originals, "merged");
    log.append(m.repairs);
    m.repairs = std::move(log);
    return m;
}

void print_migration(std::ostream& out, const Migration& m, const CliEnv& env) {
    out << "repairs\n" << m.repairs.to_text();
    out << "classification\n";
    for (const auto& t : m.classification.tables) {
        out << "  " << t.table << " " << (t.is_linking() ? "linking" : "entity") << "\n";
    }
    out << "graph\n" << graph_stats(m.graph).to_text();
    if (!m.build.orphans.empty()) out << "orphan references " << m.build.orphans.size() << "\n";
    out << paint(env, m.consistency.to_text(), m.consistency.converged);
    if (!m.consistency.to_text().ends_with('\n')) out << "\n";
}

struct TranslateResult {
    std::string cypher;
    nlohmann::json ast;
};

TranslateResult translate_one(const Migration& m, const std::string& sql_text) {
    sql::Select tree = sql::parse_sql(sql_text);
    const auto renames = m.renames();
    if (!renames.empty()) tree = rename_tables(tree, renames);
    Translation t = translate_with_provenance(tree, m.classification);
    TranslateResult r;
    r.cypher = cypher::render_cypher(t.query);
    nlohmann::json prov = nlohmann::json::array();
    for (const auto& p : t.provenance) prov.push_back({{"sql", p.sql_key}, {"cypher", p.cypher_clause}});
    r.ast = {{"sql", sql_text},
             {"sql_ast", sql::to_json(tree)},
             {"cypher", r.cypher},
             {"cypher_ast", cypher::to_json(t.query)},
             {"provenance", std::move(prov)}};
    return r;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DumpSyntaxError*>(&e) ||
        dynamic_cast<const WorkloadFormatError*>(&e) || dynamic_cast<const GraphFormatError*>(&e) ||
        dynamic_cast<const ManifestMismatch*>(&e)) {
        return kExitParse;
    }
    if (dynamic_cast<const UnknownSchemaItem*>(&e) || dynamic_cast<const UntranslatableQuery*>(&e) ||
        dynamic_cast<const ClassificationMismatch*>(&e)) {
        return kExitMapping;
    }
    if (dynamic_cast<const UnsupportedFormat*>(&e) || dynamic_cast<const InvalidDomainName*>(&e)) return kExitUsage;
    return kExitError;
}

std::string side_by_side(const std::string& left, const std::string& right) {
    auto split = [](const std::string& s) {
        std::vector<std::string> lines;
        std::istringstream in(s);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        return lines;
    };
    const auto a = split(left);
    const auto b = split(right);
    std::size_t width = 0;
    for (const auto& l : a) width = std::max(width, l.size());
    std::string out;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        std::string l = i < a.size() ? a[i] : "";
        l.append(width - l.size(), ' ');
        out += l + "  ||  " + (i < b.size() ? b[i] : "") + "\n";
    }
    return out;
}

struct ReplState {
    const Migration* m = nullptr;
    bool execute = false;
};

void repl_line(const std::string& line, ReplState& s, std::ostream& out, const CliEnv& env) {
    if (line == ":exec on") {
        s.execute = true;
        return;
    }
    if (line == ":exec off") {
        s.execute = false;
        return;
    }
    if (line == ":tables") {
        for (const auto& t : s.m->classification.tables) {
            out << t.table << " " << (t.is_linking() ? "linking" : "entity") << "\n";
        }
        return;
    }
    if (line == ":help") {
        out << "enter one SQL query per line\n:exec on|off  execute both queries\n:tables       list tables\n"
               ":quit         leave\n";
        return;
    }
    try {
        const auto r = translate_one(*s.m, line);
        out << r.cypher << "\n";
        if (!s.execute) return;
        const auto o = evaluate_query(*s.m, "repl", line, true);
        const std::string left = o.r_sql ? o.r_sql->to_text() : "sql error: " + o.sql_error + "\n";
        const std::string right = o.r_cyp ? o.r_cyp->to_text() : "cypher error: " + o.failure + "\n";
        out << side_by_side("SQL\n" + left, "Cypher\n" + right);
        out << paint(env, o.match ? "match" : "mismatch", o.match);
        for (const auto& t : o.tags) out << " [" << t << "]";
        out << "\n";
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            const CliEnv& env) {
    CLI::App app{"Relational database to property graph migration and SQL to Cypher translation", "relkg"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI file with one key per flag, sections per subcommand");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());

    // migrate
    std::vector<std::string> m_in;
    std::string m_domain, m_out, m_format = "jsonl", m_log, m_workload, m_workload_format;
    bool m_namespace = false;
    RepairToggles m_rep;
    auto* mig = app.add_subcommand("migrate", "Repair a database and build its property graph");
    mig->add_option("--in", m_in, "Database directory, CSV bundle or .sql file (repeatable)")->required();
    mig->add_option("--domain", m_domain, "Namespace table names as <domain>.<table> (single input)");
    mig->add_flag("--namespace", m_namespace, "Namespace every input under its own database name");
    mig->add_option("--workload", m_workload, "Queries used for JOIN-based key inference");
    mig->add_option("--workload-format", m_workload_format, "jsonl or plain (default: by extension)");
    mig->add_option("--out", m_out, "Write the graph export here");
    mig->add_option("--format", m_format, "Export format: jsonl or cypher-script")->capture_default_str();
    mig->add_option("--log", m_log, "Write repair, build and consistency logs as JSON");
    add_repair_flags(mig, m_rep);

    // translate
    std::string t_db, t_domain, t_sql;
    bool t_ast = false;
    RepairToggles t_rep;
    auto* trn = app.add_subcommand("translate", "Translate SQL (one query per line) to Cypher");
    trn->add_option("--db", t_db, "Database that provides the schema")->required();
    trn->add_option("--domain", t_domain, "Namespace the schema first");
    trn->add_option("--sql", t_sql, "File with SQL queries (default: stdin)");
    trn->add_flag("--emit-ast", t_ast, "Print JSON with both trees and clause provenance");
    add_repair_flags(trn, t_rep);

    // eval
    std::vector<std::string> e_db;
    std::string e_workload, e_format, e_default_db, e_report;
    double e_threshold = 1.0;
    bool e_strict = false, e_namespace = false;
    unsigned e_jobs = 1;
    std::size_t e_generated = 0;
    std::uint64_t e_seed = 0;
    RepairToggles e_rep;
    auto* ev = app.add_subcommand("eval", "Run a workload in SQL and in Cypher and report EA and VS");
    ev->add_option("--db", e_db, "Database directory or file; its name is the db_id (repeatable)");
    ev->add_option("--workload", e_workload, "Workload file");
    ev->add_option("--format", e_format, "jsonl or plain (default: by extension)");
    ev->add_option("--default-db", e_default_db, "db_id for plain workloads (default: the only --db)");
    ev->add_option("--generated", e_generated, "Evaluate this many random instances instead of a workload");
    ev->add_option("--seed", e_seed, "First seed for --generated")->capture_default_str();
    ev->add_option("--report", e_report, "Write the full report as JSON");
    ev->add_option("--threshold", e_threshold, "Minimum EA for exit status 0")->capture_default_str();
    ev->add_flag("--strict", e_strict, "Count known divergences as mismatches");
    ev->add_flag("--namespace", e_namespace, "Namespace every database under its db_id");
    ev->add_option("--jobs", e_jobs, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 64u));
    add_repair_flags(ev, e_rep);

    // stats
    std::string s_in;
    bool s_json = false;
    auto* st = app.add_subcommand("stats", "Label and edge-type counts of a jsonl graph export");
    st->add_option("--in", s_in, "Graph export (jsonl)")->required();
    st->add_flag("--json", s_json, "Print JSON");

    // repl
    std::string r_db, r_domain;
    bool r_exec = false;
    RepairToggles r_rep;
    auto* repl = app.add_subcommand("repl", "Read SQL lines, print Cypher, optionally run both");
    repl->add_option("--db", r_db, "Database to query")->required();
    repl->add_option("--domain", r_domain, "Namespace the schema first");
    repl->add_flag("--execute", r_exec, "Execute both queries and show the results side by side");
    add_repair_flags(repl, r_rep);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "relkg: " << e.what() << "\n";
        return kExitUsage;
    }

    auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional(s); };

    try {
        if (*mig) {
            if (!m_domain.empty() && m_in.size() > 1) {
                err << "relkg: --domain takes a single --in; use --namespace for several\n";
                return kExitUsage;
            }
            const ExportFormat fmt = parse_export_format(m_format);
            Workload w;
            if (!m_workload.empty()) {
                w = load_workload(m_workload, workload_format_for(m_workload_format, m_workload), db_name(m_in[0]));
            }
            const Migration m = migrate_inputs(m_in, opt(m_domain), m_namespace, m_rep, w);
            print_migration(out, m, env);
            if (!m_out.empty()) write_file(m_out, export_graph(m.graph, fmt));
            if (!m_log.empty()) {
                nlohmann::json j{{"repairs", m.repairs.to_json()},
                                 {"build", m.build.to_json()},
                                 {"consistency", m.consistency.to_json()}};
                write_file(m_log, j.dump(2) + "\n");
            }
            return m.consistency.converged ? kExitOk : kExitMapping;
        }

        if (*trn) {
            const Workload queries =
                parse_workload(t_sql.empty() ? read_all(in) : read_file(t_sql), WorkloadFormat::Plain);
            Workload for_inference = queries;
            for (auto& it : for_inference.items) it.db_id = db_name(t_db);
            const Migration m = migrate_inputs({t_db}, opt(t_domain), false, t_rep, for_inference);
            int status = kExitOk;
            for (const auto& it : queries.items) {
                try {
                    const auto r = translate_one(m, it.sql);
                    out << (t_ast ? r.ast.dump() : r.cypher) << "\n";
                } catch (const std::exception& e) {
                    err << "relkg: " << e.what() << "\n";
                    if (status == kExitOk) status = exit_code_for(e);
                }
            }
            return status;
        }

        if (*ev) {
            std::map<std::string, Migration> migrations;
            Workload w;
            if (e_generated > 0) {
                if (!e_workload.empty() || !e_db.empty()) {
                    err << "relkg: --generated replaces --db and --workload\n";
                    return kExitUsage;
                }
                for (std::size_t i = 0; i < e_generated; ++i) {
                    const std::uint64_t seed = e_seed + i;
                    auto inst = generate_random_instance(seed);
                    const std::string id = "gen" + std::to_string(seed);
                    MigrationOptions o;
                    o.repairs = e_rep.options(e_namespace ? std::optional(id) : std::nullopt);
                    migrations.emplace(id, migrate(std::move(inst.db), o));
                    for (auto& it : inst.workload.items) w.items.push_back({id, it.sql, it.question});
                }
            } else {
                if (e_workload.empty() || e_db.empty()) {
                    err << "relkg: eval needs --db and --workload (or --generated)\n";
                    return kExitUsage;
                }
                std::string fallback = e_default_db;
                if (fallback.empty() && e_db.size() == 1) fallback = db_name(e_db[0]);
                w = load_workload(e_workload, workload_format_for(e_format, e_workload), fallback);
                for (const auto& path : e_db) {
                    const std::string id = db_name(path);
                    migrations.emplace(id, migrate_inputs({path}, std::nullopt, e_namespace, e_rep, w));
                }
            }
            std::map<std::string, const Migration*> dbs;
            for (const auto& [id, m] : migrations) dbs.emplace(id, &m);
            const MetricsReport r = evaluate_workload(dbs, w, EvalOptions{.strict = e_strict, .jobs = e_jobs});
            out << r.to_text();
            const bool pass = r.ea >= e_threshold;
            std::ostringstream verdict;
            verdict << "EA " << r.ea << (pass ? " >= " : " < ") << "threshold " << e_threshold;
            out << paint(env, verdict.str(), pass) << "\n";
            if (!e_report.empty()) write_file(e_report, r.to_json().dump(2) + "\n");
            return pass ? kExitOk : kExitBelowThreshold;
        }

        if (*st) {
            const PropertyGraph g = import_jsonl(read_file(s_in));
            const GraphStats s = graph_stats(g);
            out << (s_json ? s.to_json().dump(2) + "\n" : s.to_text());
            return kExitOk;
        }

        if (*repl) {
            const Migration m = migrate_inputs({r_db}, opt(r_domain), false, r_rep, Workload{});
            ReplState state{&m, r_exec};
            for (;;) {
                if (env.interactive) out << "sql> " << std::flush;
                std::string line;
                if (!std::getline(in, line)) break;
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
                if (line.empty()) continue;
                if (line == ":quit" || line == ":q") break;
                repl_line(line, state, out, env);
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        err << "relkg: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitUsage;
}

}  // namespace relkg
