#include "minispace/gateway/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "minispace/gateway/export.hpp"
#include "minispace/gateway/service.hpp"
#include "minispace/studysim/analysis.hpp"
#include "minispace/taskgen.hpp"

namespace minispace::gateway {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "-" or empty writes to `out`.
void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << bytes;
        out.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    f << bytes;
    if (!f) throw FormatError("cannot write " + path);
}

std::string base_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

std::vector<IngestResult> ingest_files(const std::vector<std::string>& paths) {
    std::vector<IngestResult> all;
    for (const auto& p : paths) {
        for (auto& e : ingest_upload(base_name(p), read_file(p))) all.push_back(std::move(e));
    }
    return all;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

sim::CohortConfig load_config(const std::string& path) {
    if (path.empty()) return sim::CohortConfig::defaults();
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), e.byte);
    }
    auto c = sim::CohortConfig::from_json(doc);
    c.validate();
    return c;
}

struct CohortFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_per_cell;
    bool no_supervised = false;
    bool null = false;

    void add_to(CLI::App* app) {
        app->add_option("--config", config, "Cohort config file (JSON); bundled defaults when omitted")
            ->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Override the config seed");
        app->add_option("--n-per-cell", n_per_cell, "Participants per unsupervised cell")->check(CLI::Range(2, 100000));
        app->add_flag("--no-supervised", no_supervised, "Skip the supervised proxy studies");
        app->add_flag("--null", null, "Remove every planted effect");
    }

    sim::CohortConfig resolve() const {
        sim::CohortConfig c = load_config(config);
        if (seed) c.seed = *seed;
        if (n_per_cell) c.n_per_cell = *n_per_cell;
        if (no_supervised) c.supervised_enabled = false;
        if (null) c = sim::null_config(c);
        c.validate();
        return c;
    }
};

sim::AnalysisOptions analysis_options(const std::string& questions) {
    sim::AnalysisOptions o;
    for (const auto& q : split_list(questions)) o.questions.insert(q);
    o.selected();
    return o;
}

Server* g_server = nullptr;
extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SPACE pipeline: task plans, session logs, CSV export, cohort simulation and analysis", "space"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "space 1.0.0 (export schema " + std::string(kExportSchemaVersion) + ")");

    // gen
    int week = 1;
    std::uint64_t plan_seed = 0;
    int n_pairs = 2;
    std::string map_file, out_path;
    auto* gen = app.add_subcommand("gen", "Generate a weekly task plan");
    gen->add_option("--week", week, "Study week (1-3)")->required()->check(CLI::Range(1, 3));
    gen->add_option("--seed", plan_seed, "Plan seed")->required();
    gen->add_option("--pairs", n_pairs, "Rotation pairs (weeks 1-2)")->check(CLI::Range(1, 50));
    gen->add_option("--map", map_file, "Landmark map file (JSON map block)")->check(CLI::ExistingFile);
    gen->add_option("-o,--output", out_path, "Output file (default stdout)");

    // simulate
    CohortFlags sim_flags;
    std::string dataset_dir;
    auto* simulate = app.add_subcommand("simulate", "Simulate a cohort and write participants.csv and sessions.zip");
    sim_flags.add_to(simulate);
    simulate->add_option("-o,--output", dataset_dir, "Output directory")->required();

    // config
    bool config_null = false;
    auto* config = app.add_subcommand("config", "Print the bundled cohort config");
    config->add_flag("--null", config_null, "Print the matching null config");
    config->add_option("-o,--output", out_path, "Output file (default stdout)");

    // parse
    std::vector<std::string> inputs;
    bool parse_json = false;
    auto* parse = app.add_subcommand("parse", "Validate session logs or zip archives");
    parse->add_option("inputs", inputs, "Log files or archives")->required()->check(CLI::ExistingFile);
    parse->add_flag("--json", parse_json, "One JSON status object per entry");

    // export
    std::string mode = "quick_summary", columns;
    bool list_columns = false;
    auto* exp = app.add_subcommand("export", "Export CSV from session logs or archives");
    exp->add_option("inputs", inputs, "Log files or archives")->required()->check(CLI::ExistingFile);
    exp->add_option("--mode", mode, "detailed or quick_summary")
        ->check(CLI::IsMember({"detailed", "quick_summary"}));
    exp->add_option("--columns", columns, "Comma-separated column names (default: the whole catalog)");
    exp->add_flag("--list-columns", list_columns, "Print the variable catalog as JSON instead");
    exp->add_option("-o,--output", out_path, "Output file (default stdout)");

    // analyze
    CohortFlags an_flags;
    std::string questions, format = "text", table;
    auto* analyze = app.add_subcommand("analyze", "Run the analysis plan on a dataset or a simulated cohort");
    analyze->add_option("--dataset", dataset_dir, "Dataset directory written by simulate")->check(CLI::ExistingDirectory);
    an_flags.add_to(analyze);
    analyze->add_option("--questions", questions, "Comma-separated subset of Q1,Q2,Q3,Q3.1,Q4,Q5,Q6");
    analyze->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    analyze->add_option("--table", table, "Write one intermediate table instead of the report")
        ->check(CLI::IsMember(sim::analysis_tables()));
    analyze->add_option("-o,--output", out_path, "Output file (default stdout)");

    // recover
    CohortFlags rec_flags;
    int reps = 100;
    unsigned threads = 0;
    auto* recover = app.add_subcommand("recover", "Repeat simulate and analyze to measure effect recovery");
    rec_flags.add_to(recover);
    recover->add_option("--reps", reps, "Repetitions")->check(CLI::Range(1, 100000));
    recover->add_option("--threads", threads, "Worker threads (0: all cores)");
    recover->add_option("--questions", questions, "Comma-separated subset of questions");
    recover->add_option("-o,--output", out_path, "Output file (default stdout)");

    // serve
    ServiceConfig service;
    service.port = port_from_env();
    long ttl_s = service.batch_ttl.count();
    double max_upload_mb = static_cast<double>(service.max_upload_bytes) / (1 << 20);
    std::string ui_dir;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP service");
    serve->add_option("--host", service.host, "Listen address");
    serve->add_option("--port", service.port, "Port (default SPACE_PORT or 8787)")->check(CLI::Range(0, 65535));
    serve->add_option("--ttl", ttl_s, "Seconds an idle batch is kept")->check(CLI::PositiveNumber);
    serve->add_option("--max-upload-mb", max_upload_mb, "Upload size cap in MiB")->check(CLI::PositiveNumber);
    serve->add_option("--ui", ui_dir, "Directory of UI assets served at /")->check(CLI::ExistingDirectory);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        json doc{{"error", {{"kind", "usage"}, {"message", e.what()}}}};
        err << doc.dump() << "\n" << "Run with --help for usage.\n";
        return kExitUsage;
    }

    try {
        if (*gen) {
            std::optional<LandmarkMap> map;
            if (!map_file.empty()) map = map_from_json(nlohmann::json::parse(read_file(map_file)));
            PlanConfig pc;
            pc.n_pairs = n_pairs;
            const TaskPlan plan = generate_plan(week, plan_seed, pc, map ? &*map : nullptr);
            write_output(out_path, plan_to_json(plan).dump(2) + "\n", out);
        } else if (*simulate) {
            const auto c = sim_flags.resolve();
            const auto data = sim::simulate_cohort(c);
            sim::save_dataset(data, dataset_dir);
            out << json{{"output", dataset_dir},
                        {"participants", data.participants.size()},
                        {"sessions", data.sessions.size()},
                        {"seed", c.seed}}
                       .dump()
                << "\n";
        } else if (*config) {
            const auto& d = sim::CohortConfig::defaults();
            write_output(out_path, (config_null ? sim::null_config(d) : d).to_json().dump(2) + "\n", out);
        } else if (*parse) {
            const auto entries = ingest_files(inputs);
            int failed = 0;
            for (const auto& e : entries) {
                json status = entry_status_json(e);
                if (e.ok()) {
                    const auto warnings = sampling_warnings(e.log());
                    if (!warnings.empty()) status["warnings"] = warnings;
                } else {
                    ++failed;
                    err << json{{"error", status}}.dump() << "\n";
                }
                if (parse_json) {
                    out << status.dump() << "\n";
                } else if (e.ok()) {
                    out << "ok     " << e.source_name << "  " << e.log().participant_id << " week " << e.log().week;
                    if (status.contains("warnings")) out << "  (" << status["warnings"].size() << " sampling warnings)";
                    out << "\n";
                } else {
                    out << "error  " << e.source_name << "  " << e.error().message << "\n";
                }
            }
            if (!parse_json) out << entries.size() - failed << " ok, " << failed << " failed\n";
            return failed ? kExitFailure : kExitOk;
        } else if (*exp) {
            const auto entries = ingest_files(inputs);
            for (const auto& e : entries) {
                if (!e.ok()) err << json{{"warning", entry_status_json(e)}}.dump() << "\n";
            }
            const auto logs = ok_logs(entries);
            const ExportMode m = parse_mode(mode);
            const VariableCatalog cat = build_catalog(logs, m);
            if (list_columns) {
                write_output(out_path, catalog_to_json(cat).dump(2) + "\n", out);
            } else {
                ExportRequest request{m, columns.empty() ? cat.columns() : split_list(columns)};
                write_output(out_path, export_csv(logs, request), out);
            }
        } else if (*analyze) {
            sim::StudyDataset data;
            if (!dataset_dir.empty()) {
                if (!an_flags.config.empty() || an_flags.seed || an_flags.n_per_cell || an_flags.null ||
                    an_flags.no_supervised) {
                    err << json{{"error", {{"kind", "usage"}, {"message", "--dataset excludes the cohort flags"}}}}.dump()
                        << "\n";
                    return kExitUsage;
                }
                data = sim::load_dataset(dataset_dir);
            } else {
                data = sim::simulate_cohort(an_flags.resolve());
            }
            if (!table.empty()) {
                write_output(out_path, sim::analysis_table_csv(data, table), out);
            } else {
                const auto report = sim::analyze_study(data, analysis_options(questions));
                write_output(out_path, format == "csv" ? sim::report_csv(report) : sim::report_text(report), out);
            }
        } else if (*recover) {
            sim::RecoveryOptions o;
            o.n_reps = reps;
            o.threads = threads;
            o.analysis = analysis_options(questions);
            const auto report = sim::recovery_experiment(rec_flags.resolve(), o);
            for (const auto& [rep, message] : report.failures) {
                err << json{{"warning", {{"rep", rep}, {"message", message}}}}.dump() << "\n";
            }
            write_output(out_path, sim::recovery_csv(report), out);
        } else if (*serve) {
            service.batch_ttl = std::chrono::seconds(ttl_s);
            service.max_upload_bytes = static_cast<std::size_t>(max_upload_mb * (1 << 20));
            service.ui_dir = ui_dir;
            Server server(service);
            const int port = server.bind();
            out << json{{"listening", "http://" + service.host + ":" + std::to_string(port) + "/"}}.dump() << "\n";
            out.flush();
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            g_server = nullptr;
        }
    } catch (const std::exception& e) {
        err << error_json(e).dump() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace minispace::gateway
