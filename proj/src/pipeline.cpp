#include "coevo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "coevo/error.hpp"
#include "coevo/io/csv.hpp"
#include "coevo/netmetrics.hpp"

namespace coevo::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

json read_json_file(const fs::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string bool_field(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed: " + path.string());
}

std::string sha256_file(const fs::path& path) {
    auto in = open_input(path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericalError("SHA-256 unavailable");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

// ---------------------------------------------------------------------------
// Segmented logs

SegmentedLog segment_log(const std::vector<ingest::EventRecord>& events, ingest::PayloadKind payload,
                         std::size_t segment_size, bool include_isolated) {
    if (segment_size == 0) throw ConfigError("segment_size must be at least 1");
    SegmentedLog log;
    log.payload = payload;
    log.segment_size = segment_size;
    log.include_isolated = include_isolated;
    for (auto& [label, group_events] : ingest::split_by_group(events))
        log.groups.push_back({label, ingest::segment_by_actions(group_events, segment_size)});
    return log;
}

ingest::ParseResult load_events(const fs::path& path, const ingest::FormatDescriptor& descriptor) {
    auto in = open_input(path);
    return ingest::parse_events(in, descriptor);
}

void write_segments(const fs::path& dir, const SegmentedLog& log) {
    fs::create_directories(dir);
    json meta;
    meta["segment_size"] = log.segment_size;
    meta["payload"] = std::string(ingest::to_string(log.payload));
    meta["include_isolated"] = log.include_isolated;
    meta["parse_stats"] = {{"lines", log.parse_stats.lines},
                           {"dropped_mass", log.parse_stats.dropped_mass},
                           {"self_loops_removed", log.parse_stats.self_loops_removed}};
    auto& groups = meta["groups"] = json::array();
    for (std::size_t g = 0; g < log.groups.size(); ++g) {
        const auto sub = fmt::format("g{:03}", g);
        fs::create_directories(dir / sub);
        json entry{{"group", log.groups[g].group}, {"segments", json::array()}};
        for (const auto& seg : log.groups[g].segments) {
            const auto file = fmt::format("{}/seg_{:05}.jsonl", sub, seg.index);
            std::ostringstream body;
            ingest::serialize_events(body, seg.events, ingest::LogFormat::Jsonl);
            write_text_file(dir / file, body.str());
            entry["segments"].push_back(
                {{"index", seg.index}, {"file", file}, {"actions", seg.action_count}, {"partial", seg.partial}});
        }
        groups.push_back(std::move(entry));
    }
    write_text_file(dir / "segments.json", meta.dump(2) + "\n");
}

SegmentedLog read_segments(const fs::path& dir) {
    const auto meta = read_json_file(dir / "segments.json");
    SegmentedLog log;
    try {
        log.segment_size = meta.at("segment_size").get<std::size_t>();
        log.payload = ingest::parse_payload_kind(meta.at("payload").get<std::string>());
        log.include_isolated = meta.at("include_isolated").get<bool>();
        if (meta.contains("parse_stats")) {
            const auto& ps = meta["parse_stats"];
            log.parse_stats = {ps.value("lines", std::size_t{0}), ps.value("dropped_mass", std::size_t{0}),
                               ps.value("self_loops_removed", std::size_t{0})};
        }
        for (const auto& g : meta.at("groups")) {
            GroupSegments group{g.at("group").get<std::string>(), {}};
            for (const auto& s : g.at("segments")) {
                ingest::Segment seg;
                seg.index = s.at("index").get<std::size_t>();
                seg.action_count = s.at("actions").get<std::size_t>();
                seg.partial = s.at("partial").get<bool>();
                auto in = open_input(dir / s.at("file").get<std::string>());
                seg.events = ingest::parse_events(in, {ingest::LogFormat::Jsonl, log.payload,
                                                       std::numeric_limits<std::size_t>::max()})
                                 .events;
                group.segments.push_back(std::move(seg));
            }
            log.groups.push_back(std::move(group));
        }
    } catch (const json::exception& e) {
        throw InputError((dir / "segments.json").string() + ": " + e.what());
    }
    return log;
}

// ---------------------------------------------------------------------------
// Tables

void write_metric_table(std::ostream& out, const MetricTable& table) {
    std::vector<std::string> fields = {"group", "segment", "partial"};
    fields.insert(fields.end(), table.columns.begin(), table.columns.end());
    io::write_csv_row(out, fields);
    for (std::size_t r = 0; r < table.size(); ++r) {
        fields = {table.group[r], std::to_string(table.segment[r]), bool_field(table.partial[r])};
        for (double v : table.rows[r]) fields.push_back(io::format_real(v));
        io::write_csv_row(out, fields);
    }
}

MetricTable read_metric_table(std::istream& in) {
    MetricTable table;
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!io::read_csv_record(in, fields, line)) throw InputError("empty metric table");
    if (fields.size() < 3 || fields[0] != "group" || fields[1] != "segment" || fields[2] != "partial")
        throw ParseError(line, "metric table header must start with group,segment,partial");
    table.columns.assign(fields.begin() + 3, fields.end());
    while (io::read_csv_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != table.columns.size() + 3)
            throw ParseError(line, fmt::format("expected {} fields, got {}", table.columns.size() + 3, fields.size()));
        table.group.push_back(fields[0]);
        try {
            table.segment.push_back(std::stoul(fields[1]));
        } catch (const std::exception&) {
            throw ParseError(line, "bad segment index '" + fields[1] + "'");
        }
        if (fields[2] != "0" && fields[2] != "1") throw ParseError(line, "partial must be 0 or 1");
        table.partial.push_back(fields[2] == "1");
        std::vector<double> row;
        for (std::size_t c = 3; c < fields.size(); ++c) {
            try {
                row.push_back(io::parse_real(fields[c]));
            } catch (const std::exception&) {
                throw ParseError(line, "bad number '" + fields[c] + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

MetricTable read_metric_table(const fs::path& path) {
    auto in = open_input(path);
    try {
        return read_metric_table(in);
    } catch (const ParseError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

NetOutputs compute_netmetrics(const SegmentedLog& log, const net::ConductanceConfig& conductance,
                              std::size_t max_lag) {
    conductance.validate();
    if (max_lag == 0) throw ConfigError("max_lag must be at least 1");
    NetOutputs out;
    out.metrics.columns = net::net_metric_columns();
    for (const auto& group : log.groups) {
        std::vector<ingest::SegmentGraph> graphs;
        graphs.reserve(group.segments.size());
        for (const auto& s : group.segments) graphs.push_back(ingest::build_segment_graph(s, log.include_isolated));
        const auto rows = net::compute_net_series(graphs, conductance);
        for (std::size_t t = 0; t < rows.size(); ++t) {
            out.metrics.group.push_back(group.group);
            out.metrics.segment.push_back(group.segments[t].index);
            out.metrics.partial.push_back(group.segments[t].partial);
            out.metrics.rows.push_back(net::to_values(rows[t]));
        }
        std::size_t full = graphs.size();
        while (full > 0 && group.segments[full - 1].partial) --full;
        if (full >= 2) {
            const auto curve = net::edge_repeat_curve(std::span(graphs).first(full), std::min(max_lag, full - 1));
            for (const auto& [lag, p] : curve) out.repeat_curve.push_back({group.group, lag, p});
        }
    }
    return out;
}

MetricTable compute_contentmetrics(const SegmentedLog& log, const content::ContentOptions& options) {
    MetricTable table;
    table.columns = content::content_columns(log.payload);
    content::DocumentFrequencies corpus;
    if (log.payload == ingest::PayloadKind::Tokens) {
        std::vector<ingest::Segment> all;
        for (const auto& g : log.groups) all.insert(all.end(), g.segments.begin(), g.segments.end());
        corpus = content::DocumentFrequencies::from_segments(all, options.strip_quotes);
    }
    for (const auto& group : log.groups) {
        std::vector<ingest::SegmentGraph> graphs;
        graphs.reserve(group.segments.size());
        for (const auto& s : group.segments) graphs.push_back(ingest::build_segment_graph(s, log.include_isolated));
        const auto series = content::compute_content_series(group.segments, graphs, log.payload, corpus, options);
        for (std::size_t t = 0; t < series.rows.size(); ++t) {
            table.group.push_back(group.group);
            table.segment.push_back(group.segments[t].index);
            table.partial.push_back(group.segments[t].partial);
            table.rows.push_back(series.rows[t]);
        }
    }
    return table;
}

void write_repeat_curve(std::ostream& out, const std::vector<RepeatPoint>& curve) {
    io::write_csv_row(out, {"group", "lag", "probability"});
    for (const auto& p : curve) io::write_csv_row(out, {p.group, std::to_string(p.lag), io::format_real(p.probability)});
}

std::vector<stats::MetricSeries> assemble_series(const MetricTable& net, const MetricTable& content,
                                                 bool include_partial) {
    std::map<std::pair<std::string, std::size_t>, std::size_t> content_row;
    for (std::size_t r = 0; r < content.size(); ++r) content_row[{content.group[r], content.segment[r]}] = r;

    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> rows_of;
    for (std::size_t r = 0; r < net.size(); ++r) {
        if (net.partial[r] && !include_partial) continue;
        if (!rows_of.contains(net.group[r])) order.push_back(net.group[r]);
        rows_of[net.group[r]].push_back(r);
    }
    std::sort(order.begin(), order.end());

    std::vector<std::string> diff_names;
    for (const auto& name : net::standard_metric_columns())
        if (std::find(net.columns.begin(), net.columns.end(), name) != net.columns.end()) diff_names.push_back(name);

    std::vector<stats::MetricSeries> out;
    for (const auto& label : order) {
        const auto& rows = rows_of[label];
        stats::MetricSeries s;
        s.group = label;
        for (auto r : rows) s.segments.push_back(net.segment[r]);
        for (std::size_t c = 0; c < net.columns.size(); ++c) {
            std::vector<double> v;
            for (auto r : rows) v.push_back(net.rows[r][c]);
            s.add_column(net.columns[c], std::move(v));
        }
        for (std::size_t c = 0; c < content.columns.size(); ++c) {
            std::vector<double> v;
            for (auto r : rows) {
                const auto it = content_row.find({label, net.segment[r]});
                v.push_back(it == content_row.end() ? kNaN : content.rows[it->second][c]);
            }
            s.add_column(content.columns[c], std::move(v));
        }
        s.add_first_differences(diff_names);
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

bool is_network_column(const std::string& name) {
    const auto& cols = net::net_metric_columns();
    return name.starts_with("d_") || std::find(cols.begin(), cols.end(), name) != cols.end();
}

}  // namespace

std::vector<std::string> network_columns(const stats::MetricSeries& series) {
    std::vector<std::string> out;
    for (const auto& c : series.columns)
        if (is_network_column(c)) out.push_back(c);
    return out;
}

std::vector<std::string> content_columns(const stats::MetricSeries& series) {
    std::vector<std::string> out;
    for (const auto& c : series.columns)
        if (!is_network_column(c)) out.push_back(c);
    return out;
}

// ---------------------------------------------------------------------------
// Statistics stages

std::vector<StationarityRow> stationarity_table(const std::vector<stats::MetricSeries>& groups,
                                                stats::Deterministic deterministic) {
    std::vector<StationarityRow> rows;
    for (const auto& g : groups) {
        for (const auto& col : g.columns) {
            for (const char* test : {"adf", "pp"}) {
                StationarityRow row{g.group, col, test, std::nullopt, ""};
                try {
                    row.result = std::string_view(test) == "adf" ? stats::adf_test(g.column(col), deterministic)
                                                                 : stats::pp_test(g.column(col), deterministic);
                } catch (const std::invalid_argument&) {
                    row.note = "too few observations";
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void write_stationarity(std::ostream& out, const std::vector<StationarityRow>& rows) {
    io::write_csv_row(out, {"group", "column", "test", "statistic", "lag_or_bandwidth", "nobs", "p_band",
                            "reject_unit_root", "degenerate", "note"});
    for (const auto& r : rows) {
        if (r.result) {
            const auto& s = *r.result;
            io::write_csv_row(out, {r.group, r.column, r.test, io::format_real(s.statistic),
                                    std::to_string(s.lag_or_bandwidth), std::to_string(s.nobs),
                                    std::string(stats::to_string(s.p_band)), bool_field(s.reject_unit_root),
                                    bool_field(s.degenerate), r.note});
        } else {
            io::write_csv_row(out, {r.group, r.column, r.test, "", "", "", "", "", "", r.note});
        }
    }
}

std::vector<std::pair<std::string, std::string>> all_pairs(const stats::MetricSeries& series) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : network_columns(series))
        for (const auto& b : content_columns(series)) pairs.emplace_back(a, b);
    return pairs;
}

std::vector<std::pair<std::string, std::string>> read_pairs(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> fields;
    std::size_t line = 0;
    while (io::read_csv_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 2) throw ParseError(line, "pairs file rows need exactly two columns");
        if (pairs.empty() && fields[0] == "var_a" && fields[1] == "var_b") continue;
        pairs.emplace_back(fields[0], fields[1]);
    }
    if (pairs.empty()) throw InputError(path.string() + ": no pairs");
    return pairs;
}

void write_heatmap(std::ostream& out, const stats::CorrelationReport& report) {
    io::write_csv_row(out, {"var_a", "var_b", "mean_rho", "combined_p", "stars", "n_groups"});
    for (const auto& p : report.pairs)
        io::write_csv_row(out, {p.var_a, p.var_b, io::format_real(p.mean_rho), io::format_real(p.combined_p), p.stars,
                                std::to_string(p.groups.size())});
}

PredictorSet parse_predictor_set(std::string_view name) {
    if (name == "net") return PredictorSet::Network;
    if (name == "content") return PredictorSet::Content;
    if (name == "all") return PredictorSet::All;
    throw ConfigError("predictors must be net, content or all (got '" + std::string(name) + "')");
}

std::string_view to_string(PredictorSet set) {
    switch (set) {
        case PredictorSet::Network: return "net";
        case PredictorSet::Content: return "content";
        case PredictorSet::All: return "all";
    }
    return "all";
}

stats::RegressionMethod parse_method(std::string_view name) {
    if (name == "ols") return stats::RegressionMethod::Ols;
    if (name == "nw") return stats::RegressionMethod::Nw;
    throw ConfigError("method must be ols or nw (got '" + std::string(name) + "')");
}

std::string_view to_string(stats::RegressionMethod method) {
    return method == stats::RegressionMethod::Ols ? "ols" : "nw";
}

namespace {

std::vector<std::string> rank_by_association(const stats::MetricSeries& series, const std::string& target,
                                             std::vector<std::string> candidates) {
    std::vector<std::pair<double, std::string>> scored;
    for (auto& name : candidates) {
        if (name == target) continue;
        double strength = -1.0;  // unusable columns go last
        try {
            const auto r = stats::spearman(series.column(name), series.column(target));
            if (!r.degenerate) strength = std::abs(r.rho);
        } catch (const std::invalid_argument&) {
        }
        scored.emplace_back(strength, std::move(name));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> out;
    for (auto& [_, name] : scored) out.push_back(std::move(name));
    return out;
}

}  // namespace

std::vector<stats::Ordering> curve_orderings(const stats::MetricSeries& series, const std::string& target,
                                             PredictorSet set) {
    series.column(target);  // throws std::out_of_range for an unknown target
    const auto net = rank_by_association(series, target, network_columns(series));
    const auto con = rank_by_association(series, target, content_columns(series));
    std::vector<stats::Ordering> out;
    if (set != PredictorSet::Content) out.push_back({"network", net});
    if (set != PredictorSet::Network) out.push_back({"content", con});
    if (set == PredictorSet::All) {
        auto both = net;
        both.insert(both.end(), con.begin(), con.end());
        out.push_back({"network+content", both});
    }
    return out;
}

std::vector<GroupCurve> regress_groups(const std::vector<stats::MetricSeries>& groups, const std::string& target,
                                       PredictorSet set, stats::RegressionMethod method) {
    std::vector<GroupCurve> out;
    for (const auto& g : groups) {
        const auto orderings = curve_orderings(g, target, set);
        out.push_back({g.group, stats::incremental_r2_curve(g, target, orderings, method)});
    }
    return out;
}

void write_r2_curve(std::ostream& out, const std::vector<GroupCurve>& curves) {
    io::write_csv_row(out, {"group", "ordering", "step", "added", "r2", "rows", "leak", "degenerate"});
    for (const auto& c : curves)
        for (const auto& p : c.points)
            io::write_csv_row(out, {c.group, p.ordering, std::to_string(p.step), p.added, io::format_real(p.r2),
                                    std::to_string(p.rows), bool_field(p.leak), bool_field(p.degenerate)});
}

double curve_plateau(const std::vector<stats::CurvePoint>& points, const std::string& ordering) {
    double best = kNaN;
    for (const auto& p : points)
        if (p.ordering == ordering && !std::isnan(p.r2) && (std::isnan(best) || p.r2 > best)) best = p.r2;
    return best;
}

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
    if (input.empty()) throw ConfigError("input is required");
    if (segment_size == 0) throw ConfigError("segment_size must be at least 1");
    if (max_targets == 0) throw ConfigError("max_targets must be at least 1");
    if (max_lag == 0) throw ConfigError("max_lag must be at least 1");
    if (!(content.alpha > 0)) throw ConfigError("content.alpha must be positive");
    conductance.validate();
}

namespace {

std::string_view to_string(content::TextUnit u) { return u == content::TextUnit::User ? "user" : "document"; }
std::string_view to_string(stats::Deterministic d) { return d == stats::Deterministic::Constant ? "c" : "ct"; }

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown option " + where + "." + key);
}

}  // namespace

PipelineConfig parse_pipeline_config(const json& j) {
    check_keys(j,
               {"input", "format", "payload", "max_targets", "segment_size", "include_isolated", "include_partial",
                "conductance", "max_lag", "content", "deterministic", "screen_stationarity", "pairs",
                "regress_target", "predictors", "method"},
               "config");
    PipelineConfig c;
    try {
        if (j.contains("input")) c.input = j["input"].get<std::string>();
        if (j.contains("format")) c.format = ingest::parse_log_format(j["format"].get<std::string>());
        if (j.contains("payload")) c.payload = ingest::parse_payload_kind(j["payload"].get<std::string>());
        if (j.contains("max_targets")) c.max_targets = j["max_targets"].get<std::size_t>();
        if (j.contains("segment_size")) {
            if (!j["segment_size"].is_number_integer() || j["segment_size"].get<long long>() < 1)
                throw ConfigError("segment_size must be a positive integer");
            c.segment_size = j["segment_size"].get<std::size_t>();
        }
        if (j.contains("include_isolated")) c.include_isolated = j["include_isolated"].get<bool>();
        if (j.contains("include_partial")) c.include_partial = j["include_partial"].get<bool>();
        if (j.contains("conductance")) {
            const auto& k = j["conductance"];
            check_keys(k, {"max_path_len", "prune_epsilon"}, "conductance");
            if (k.contains("max_path_len"))
                c.conductance.max_path_len = k["max_path_len"].is_null() ? std::numeric_limits<std::size_t>::max()
                                                                          : k["max_path_len"].get<std::size_t>();
            if (k.contains("prune_epsilon")) c.conductance.prune_epsilon = k["prune_epsilon"].get<double>();
        }
        if (j.contains("max_lag")) c.max_lag = j["max_lag"].get<std::size_t>();
        if (j.contains("content")) {
            const auto& k = j["content"];
            check_keys(k, {"alpha", "strip_quotes", "text_unit"}, "content");
            if (k.contains("alpha")) c.content.alpha = k["alpha"].get<double>();
            if (k.contains("strip_quotes")) c.content.strip_quotes = k["strip_quotes"].get<bool>();
            if (k.contains("text_unit")) {
                const auto u = k["text_unit"].get<std::string>();
                if (u == "user") c.content.text_unit = content::TextUnit::User;
                else if (u == "document") c.content.text_unit = content::TextUnit::Document;
                else throw ConfigError("content.text_unit must be user or document");
            }
        }
        if (j.contains("deterministic")) {
            const auto d = j["deterministic"].get<std::string>();
            if (d == "c") c.deterministic = stats::Deterministic::Constant;
            else if (d == "ct") c.deterministic = stats::Deterministic::ConstantTrend;
            else throw ConfigError("deterministic must be c or ct");
        }
        if (j.contains("screen_stationarity")) c.screen_stationarity = j["screen_stationarity"].get<bool>();
        if (j.contains("pairs")) c.pairs = j["pairs"].get<std::string>();
        if (j.contains("regress_target")) c.regress_target = j["regress_target"].get<std::string>();
        if (j.contains("predictors")) c.predictors = parse_predictor_set(j["predictors"].get<std::string>());
        if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const PipelineConfig& c) {
    json j;
    j["input"] = c.input;
    j["format"] = std::string(ingest::to_string(c.format));
    j["payload"] = std::string(ingest::to_string(c.payload));
    j["max_targets"] = c.max_targets;
    j["segment_size"] = c.segment_size;
    j["include_isolated"] = c.include_isolated;
    j["include_partial"] = c.include_partial;
    j["conductance"] = {{"max_path_len", c.conductance.max_path_len == std::numeric_limits<std::size_t>::max()
                                             ? json(nullptr)
                                             : json(c.conductance.max_path_len)},
                        {"prune_epsilon", c.conductance.prune_epsilon}};
    j["max_lag"] = c.max_lag;
    j["content"] = {{"alpha", c.content.alpha},
                    {"strip_quotes", c.content.strip_quotes},
                    {"text_unit", std::string(to_string(c.content.text_unit))}};
    j["deterministic"] = std::string(to_string(c.deterministic));
    j["screen_stationarity"] = c.screen_stationarity;
    j["pairs"] = c.pairs;
    j["regress_target"] = c.regress_target;
    j["predictors"] = std::string(to_string(c.predictors));
    j["method"] = std::string(to_string(c.method));
    return j;
}

// ---------------------------------------------------------------------------
// End-to-end run

namespace {

template <class F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("stage {}: {}", name, e.what()));
    } catch (const std::out_of_range& e) {
        throw Error(ExitCode::Config, fmt::format("stage {}: {}", name, e.what()));
    } catch (const fs::filesystem_error& e) {
        throw Error(ExitCode::Input, fmt::format("stage {}: {}", name, e.what()));
    } catch (const std::exception& e) {
        throw Error(ExitCode::Numerical, fmt::format("stage {}: {}", name, e.what()));
    }
}

MetricTable reread_table(const MetricTable& table) {
    std::stringstream text;
    write_metric_table(text, table);
    return read_metric_table(text);
}

template <class F>
void write_output(const fs::path& path, F&& writer) {
    std::ostringstream body;
    writer(body);
    write_text_file(path, body.str());
}

}  // namespace

json run_pipeline(const PipelineConfig& config, const fs::path& out_dir, const json& overrides) {
    config.validate();
    const fs::path input(config.input);
    if (!fs::is_regular_file(input)) throw InputError("stage ingest: missing input " + config.input);
    fs::create_directories(out_dir);

    const auto log = stage("ingest", [&] {
        auto parsed = load_events(input, {config.format, config.payload, config.max_targets});
        auto seg = segment_log(parsed.events, config.payload, config.segment_size, config.include_isolated);
        seg.parse_stats = parsed.stats;
        return seg;
    });

    const auto net = stage("netmetrics", [&] { return compute_netmetrics(log, config.conductance, config.max_lag); });
    write_output(out_dir / "metrics.csv", [&](std::ostream& o) { write_metric_table(o, net.metrics); });
    write_output(out_dir / "repeat_curve.csv", [&](std::ostream& o) { write_repeat_curve(o, net.repeat_curve); });

    const auto content = stage("contentmetrics", [&] { return compute_contentmetrics(log, config.content); });
    write_output(out_dir / "content.csv", [&](std::ostream& o) { write_metric_table(o, content); });

    // Downstream stages read the tables as serialized so staged CLI runs give identical results.
    const auto series = assemble_series(reread_table(net.metrics), reread_table(content), config.include_partial);
    if (series.empty()) throw InputError("stage stationarity: no complete segments");

    const auto stationarity =
        stage("stationarity", [&] { return stationarity_table(series, config.deterministic); });
    write_output(out_dir / "stationarity.csv", [&](std::ostream& o) { write_stationarity(o, stationarity); });

    const auto report = stage("correlate", [&] {
        const auto pairs = config.pairs == "all" ? all_pairs(series.front()) : read_pairs(config.pairs);
        return stats::correlate_groups(series, pairs, {config.screen_stationarity});
    });
    write_output(out_dir / "heatmap.csv", [&](std::ostream& o) { write_heatmap(o, report); });

    const auto target =
        config.regress_target.empty() ? content::content_columns(config.payload).front() : config.regress_target;
    const auto curves =
        stage("regress", [&] { return regress_groups(series, target, config.predictors, config.method); });
    write_output(out_dir / "r2_curve.csv", [&](std::ostream& o) { write_r2_curve(o, curves); });

    json manifest;
    manifest["tool"] = "coevo";
    manifest["version"] = kToolVersion;
    manifest["config"] = to_json(config);
    manifest["config"]["regress_target"] = target;
    manifest["overrides"] = overrides;
    manifest["inputs"] = json::array({{{"path", config.input},
                                       {"sha256", sha256_file(input)},
                                       {"bytes", fs::file_size(input)}}});
    manifest["seeds"] = json::array();
    manifest["parse_stats"] = {{"lines", log.parse_stats.lines},
                               {"dropped_mass", log.parse_stats.dropped_mass},
                               {"self_loops_removed", log.parse_stats.self_loops_removed}};
    manifest["excluded_groups"] = json::array();
    for (const auto& [g, why] : report.excluded_groups)
        manifest["excluded_groups"].push_back({{"group", g}, {"reason", why}});
    manifest["metadata"] = {{"tfidf", "tf * (ln(N / (1 + df)) + 1)"},
                            {"group_combination", "fisher-z mean rho, stouffer combined p"},
                            {"unit_root_deterministic", std::string(to_string(config.deterministic))}};
    auto& outputs = manifest["outputs"] = json::array();
    for (const auto& f : pipeline_outputs()) outputs.push_back({{"file", f}, {"sha256", sha256_file(out_dir / f)}});
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace coevo::pipeline
