// Command-line front end. Every subcommand maps library errors to exit codes 2/3/4.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <omp.h>

#include "coevo/error.hpp"
#include "coevo/pipeline.hpp"
#include "coevo/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coevo;
namespace pl = coevo::pipeline;

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

template <class F>
void emit(const std::string& path, F&& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        return;
    }
    std::ostringstream body;
    writer(body);
    pl::write_text_file(path, body.str());
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// Analysis series from one or two per-segment tables (network first, content second).
std::vector<stats::MetricSeries> load_series(const std::vector<std::string>& tables, bool include_partial) {
    if (tables.empty() || tables.size() > 2) throw ConfigError("expected one or two metric tables");
    const auto primary = pl::read_metric_table(fs::path(tables[0]));
    const auto secondary = tables.size() == 2 ? pl::read_metric_table(fs::path(tables[1])) : pl::MetricTable{};
    auto series = pl::assemble_series(primary, secondary, include_partial);
    if (series.empty()) throw InputError("no complete segments in " + tables[0]);
    return series;
}

std::vector<std::string> tables_from(const std::string& groups_dir, const std::vector<std::string>& metrics) {
    if (!metrics.empty()) return metrics;
    if (groups_dir.empty()) throw ConfigError("give --metrics or --groups");
    std::vector<std::string> out = {(fs::path(groups_dir) / "metrics.csv").string()};
    if (fs::exists(fs::path(groups_dir) / "content.csv")) out.push_back((fs::path(groups_dir) / "content.csv").string());
    return out;
}

stats::Deterministic parse_deterministic(const std::string& s) {
    if (s == "c") return stats::Deterministic::Constant;
    if (s == "ct") return stats::Deterministic::ConstantTrend;
    throw ConfigError("deterministic must be c or ct");
}

json sim_report(const sim::SimConfig& config, const sim::SimResult& r) {
    json j;
    j["tool"] = "coevo";
    j["version"] = pl::kToolVersion;
    j["config"] = config;
    j["seeds"] = json::array({config.seed});
    j["network"] = {{"nodes", r.network.n_nodes},
                    {"edges", r.network.edges.size()},
                    {"reciprocity", r.network.reciprocity},
                    {"clustering", r.network.clustering},
                    {"iterations", r.network.iterations},
                    {"infeasible", r.network.infeasible}};
    j["stats"] = {{"ticks", r.stats.ticks},
                  {"injected", r.stats.injected},
                  {"received", r.stats.received},
                  {"forwards", r.stats.forwards},
                  {"topics_used", r.stats.topics_used},
                  {"records", r.events.size()},
                  {"injection_rate", r.stats.ticks ? double(r.stats.injected) / double(r.stats.ticks) : 0.0}};
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-evolution analysis of interaction networks and exchanged content"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "OpenMP worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse an event log and write a segmented directory");
    std::string in_path, in_format = "jsonl", in_payload = "numeric", in_out = "segments";
    std::size_t in_size = 100, in_max_targets = 20;
    bool in_isolated = false;
    ingest->add_option("--input", in_path)->required();
    ingest->add_option("--format", in_format)->check(CLI::IsMember({"jsonl", "csv"}));
    ingest->add_option("--segment-size", in_size);
    ingest->add_option("--payload", in_payload)->check(CLI::IsMember({"tokens", "asset", "numeric"}));
    ingest->add_option("--include-isolated", in_isolated);
    ingest->add_option("--max-targets", in_max_targets);
    ingest->add_option("--out", in_out, "output directory");

    // netmetrics
    auto* netm = app.add_subcommand("netmetrics", "Structural metrics per segment and the edge-repeat curve");
    std::string nm_segments, nm_out = "metrics.csv", nm_repeat;
    std::size_t nm_max_path = 4, nm_max_lag = 50;
    double nm_eps = 1e-9;
    netm->add_option("--segments", nm_segments)->required();
    netm->add_option("--max-path-len", nm_max_path, "0 for unbounded");
    netm->add_option("--prune-eps", nm_eps);
    netm->add_option("--max-lag", nm_max_lag);
    netm->add_option("--out", nm_out);
    netm->add_option("--repeat-out", nm_repeat, "default: repeat_curve.csv beside --out");

    // contentmetrics
    auto* contm = app.add_subcommand("contentmetrics", "Content metrics per segment");
    std::string cm_segments, cm_out = "content.csv", cm_payload, cm_unit = "user";
    double cm_alpha = 0.01;
    bool cm_strip = false;
    contm->add_option("--segments", cm_segments)->required();
    contm->add_option("--payload", cm_payload, "must match the segmented log")
        ->check(CLI::IsMember({"tokens", "asset", "numeric"}));
    contm->add_option("--alpha", cm_alpha);
    contm->add_option("--strip-quotes", cm_strip);
    contm->add_option("--text-unit", cm_unit)->check(CLI::IsMember({"user", "document"}));
    contm->add_option("--out", cm_out);

    // stationarity
    auto* stat = app.add_subcommand("stationarity", "ADF and PP unit-root tests for every column");
    std::vector<std::string> st_tables;
    std::string st_det = "c", st_out;
    bool st_partial = false;
    stat->add_option("--metrics", st_tables, "metrics.csv [content.csv]")->required()->expected(1, 2);
    stat->add_option("--deterministic", st_det)->check(CLI::IsMember({"c", "ct"}));
    stat->add_flag("--include-partial", st_partial);
    stat->add_option("--out", st_out, "default: stdout");

    // correlate
    auto* corr = app.add_subcommand("correlate", "Per-group Spearman correlations combined over groups");
    std::string co_groups, co_pairs = "all", co_out = "heatmap.csv";
    std::vector<std::string> co_tables;
    bool co_no_screen = false, co_partial = false;
    corr->add_option("--groups", co_groups, "directory holding metrics.csv and content.csv");
    corr->add_option("--metrics", co_tables, "metrics.csv [content.csv]")->expected(1, 2);
    corr->add_option("--pairs", co_pairs, "all or a two-column CSV");
    corr->add_flag("--no-screen", co_no_screen, "keep non-stationary groups");
    corr->add_flag("--include-partial", co_partial);
    corr->add_option("--out", co_out);

    // regress
    auto* reg = app.add_subcommand("regress", "Incremental R^2 curves");
    std::string rg_groups, rg_target, rg_predictors = "all", rg_method = "nw", rg_out = "r2_curve.csv";
    std::vector<std::string> rg_tables;
    bool rg_partial = false;
    reg->add_option("--groups", rg_groups, "directory holding metrics.csv and content.csv");
    reg->add_option("--metrics", rg_tables, "metrics.csv [content.csv]")->expected(1, 2);
    reg->add_option("--target", rg_target)->required();
    reg->add_option("--predictors", rg_predictors)->check(CLI::IsMember({"net", "content", "all"}));
    reg->add_option("--method", rg_method)->check(CLI::IsMember({"ols", "nw"}));
    reg->add_flag("--include-partial", rg_partial);
    reg->add_option("--out", rg_out);

    // simulate
    auto* simc = app.add_subcommand("simulate", "Message-passing simulation");
    std::string sm_config, sm_out = "events.jsonl", sm_report;
    std::optional<std::uint64_t> sm_seed;
    std::optional<bool> sm_topic;
    std::optional<std::size_t> sm_messages;
    simc->add_option("--config", sm_config, "SimConfig JSON or a previous report");
    simc->add_option("--seed", sm_seed);
    simc->add_option("--topic", sm_topic);
    simc->add_option("--messages", sm_messages);
    simc->add_option("--out", sm_out);
    simc->add_option("--report", sm_report);
    auto* compare = simc->add_subcommand("compare", "Paired runs with and without topicality");
    std::size_t cp_seeds = 10;
    std::string cp_out;
    compare->add_option("--seeds", cp_seeds)->check(CLI::PositiveNumber);
    compare->add_option("--out", cp_out, "report JSON (default: stdout)");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "End-to-end analysis with a run manifest");
    std::string pp_config, pp_manifest, pp_out = "out";
    std::optional<std::string> ov_input, ov_format, ov_payload, ov_method, ov_predictors, ov_target, ov_pairs;
    std::optional<std::size_t> ov_size, ov_max_lag;
    pipe->add_option("--config", pp_config);
    pipe->add_option("--manifest", pp_manifest, "rerun a previous manifest");
    pipe->add_option("--out", pp_out);
    pipe->add_option("--input", ov_input);
    pipe->add_option("--format", ov_format);
    pipe->add_option("--payload", ov_payload);
    pipe->add_option("--segment-size", ov_size);
    pipe->add_option("--max-lag", ov_max_lag);
    pipe->add_option("--method", ov_method);
    pipe->add_option("--predictors", ov_predictors);
    pipe->add_option("--target", ov_target);
    pipe->add_option("--pairs", ov_pairs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }
    if (workers > 0) omp_set_num_threads(workers);

    try {
        if (*ingest) {
            const auto descriptor = ingest::FormatDescriptor{ingest::parse_log_format(in_format),
                                                             ingest::parse_payload_kind(in_payload), in_max_targets};
            if (in_size == 0) throw ConfigError("--segment-size must be at least 1");
            const auto parsed = pl::load_events(in_path, descriptor);
            auto log = pl::segment_log(parsed.events, descriptor.payload, in_size, in_isolated);
            log.parse_stats = parsed.stats;
            pl::write_segments(in_out, log);
            std::size_t n = 0;
            for (const auto& g : log.groups) n += g.segments.size();
            fmt::print(stderr, "{} events, {} groups, {} segments -> {}\n", parsed.events.size(), log.groups.size(),
                       n, in_out);
        } else if (*netm) {
            net::ConductanceConfig cc{nm_max_path == 0 ? kUnbounded : nm_max_path, nm_eps};
            const auto out = pl::compute_netmetrics(pl::read_segments(nm_segments), cc, nm_max_lag);
            emit(nm_out, [&](std::ostream& o) { pl::write_metric_table(o, out.metrics); });
            if (nm_repeat.empty()) nm_repeat = (fs::path(nm_out).parent_path() / "repeat_curve.csv").string();
            emit(nm_repeat, [&](std::ostream& o) { pl::write_repeat_curve(o, out.repeat_curve); });
        } else if (*contm) {
            const auto log = pl::read_segments(cm_segments);
            if (!cm_payload.empty() && ingest::parse_payload_kind(cm_payload) != log.payload)
                throw ConfigError(fmt::format("--payload {} does not match the segmented log ({})", cm_payload,
                                              ingest::to_string(log.payload)));
            content::ContentOptions opt{cm_alpha, cm_strip,
                                        cm_unit == "user" ? content::TextUnit::User : content::TextUnit::Document};
            if (!(cm_alpha > 0)) throw ConfigError("--alpha must be positive");
            const auto table = pl::compute_contentmetrics(log, opt);
            emit(cm_out, [&](std::ostream& o) { pl::write_metric_table(o, table); });
        } else if (*stat) {
            const auto series = load_series(st_tables, st_partial);
            const auto rows = pl::stationarity_table(series, parse_deterministic(st_det));
            emit(st_out, [&](std::ostream& o) { pl::write_stationarity(o, rows); });
        } else if (*corr) {
            const auto series = load_series(tables_from(co_groups, co_tables), co_partial);
            const auto pairs = co_pairs == "all" ? pl::all_pairs(series.front()) : pl::read_pairs(co_pairs);
            const auto report = stats::correlate_groups(series, pairs, {!co_no_screen});
            for (const auto& [g, why] : report.excluded_groups) fmt::print(stderr, "excluded {}: {}\n", g, why);
            emit(co_out, [&](std::ostream& o) { pl::write_heatmap(o, report); });
        } else if (*reg) {
            const auto series = load_series(tables_from(rg_groups, rg_tables), rg_partial);
            const auto curves = pl::regress_groups(series, rg_target, pl::parse_predictor_set(rg_predictors),
                                                   pl::parse_method(rg_method));
            emit(rg_out, [&](std::ostream& o) { pl::write_r2_curve(o, curves); });
        } else if (*simc) {
            sim::SimConfig config;
            if (!sm_config.empty()) {
                const auto j = read_json(sm_config);
                try {
                    config = (j.contains("config") ? j["config"] : j).get<sim::SimConfig>();
                } catch (const json::exception& e) {
                    throw ConfigError(sm_config + ": " + e.what());
                }
            }
            if (sm_seed) config.seed = *sm_seed;
            if (sm_topic) config.topic_enabled = *sm_topic;
            if (sm_messages) config.total_messages = *sm_messages;
            config.validate();
            if (*compare) {
                const auto report = sim::compare_topicality(config, cp_seeds);
                emit(cp_out, [&](std::ostream& o) { o << sim::to_json(report).dump(2) << '\n'; });
            } else {
                const auto result = sim::run_simulation(config);
                emit(sm_out, [&](std::ostream& o) {
                    ingest::serialize_events(o, result.events, ingest::LogFormat::Jsonl);
                });
                if (!sm_report.empty())
                    pl::write_text_file(sm_report, sim_report(config, result).dump(2) + "\n");
            }
        } else if (*pipe) {
            json base = json::object(), overrides = json::object();
            if (!pp_manifest.empty()) {
                const auto m = read_json(pp_manifest);
                if (!m.contains("config")) throw ConfigError(pp_manifest + ": no config section");
                base = m["config"];
                if (m.contains("overrides")) overrides = m["overrides"];
            } else if (!pp_config.empty()) {
                base = read_json(pp_config);
            }
            auto set = [&](const char* key, const auto& value) {
                if (value) overrides[key] = *value;
            };
            set("input", ov_input);
            set("format", ov_format);
            set("payload", ov_payload);
            set("segment_size", ov_size);
            set("max_lag", ov_max_lag);
            set("method", ov_method);
            set("predictors", ov_predictors);
            set("regress_target", ov_target);
            set("pairs", ov_pairs);
            if (!base.is_object()) throw ConfigError("pipeline config must be a JSON object");
            for (const auto& [k, v] : overrides.items()) base[k] = v;
            const auto config = pl::parse_pipeline_config(base);
            pl::run_pipeline(config, pp_out, overrides);
            fmt::print(stderr, "pipeline outputs written to {}\n", pp_out);
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.code());
    } catch (const std::out_of_range& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::Config);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::Numerical);
    }
    return 0;
}
