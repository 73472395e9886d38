#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coevo/conductance.hpp"
#include "coevo/content.hpp"
#include "coevo/events.hpp"
#include "coevo/segment.hpp"
#include "coevo/stats/correlation.hpp"
#include "coevo/stats/regression.hpp"
#include "coevo/stats/series.hpp"
#include "coevo/stats/stationarity.hpp"

namespace coevo::pipeline {

inline constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Segmented logs on disk: DIR/segments.json plus one JSONL file per segment.

struct GroupSegments {
    std::string group;
    std::vector<ingest::Segment> segments;
};

struct SegmentedLog {
    ingest::PayloadKind payload = ingest::PayloadKind::Numeric;
    std::size_t segment_size = 100;
    bool include_isolated = false;
    ingest::ParseStats parse_stats;
    std::vector<GroupSegments> groups;  ///< sorted by label
};

SegmentedLog segment_log(const std::vector<ingest::EventRecord>& events, ingest::PayloadKind payload,
                         std::size_t segment_size, bool include_isolated);
void write_segments(const std::filesystem::path& dir, const SegmentedLog& log);
/// Throws InputError when the directory or any listed file is missing or malformed.
SegmentedLog read_segments(const std::filesystem::path& dir);

/// Reads an event log file. Throws InputError when it cannot be opened.
ingest::ParseResult load_events(const std::filesystem::path& path, const ingest::FormatDescriptor& descriptor);

// ---------------------------------------------------------------------------
// Per-segment tables (metrics.csv, content.csv): group, segment, partial, <columns>.

struct MetricTable {
    std::vector<std::string> columns;
    std::vector<std::string> group;
    std::vector<std::size_t> segment;
    std::vector<bool> partial;
    std::vector<std::vector<double>> rows;  ///< rows[r][c]; NaN marks a missing value

    std::size_t size() const noexcept { return rows.size(); }
};

void write_metric_table(std::ostream& out, const MetricTable& table);
MetricTable read_metric_table(std::istream& in);
MetricTable read_metric_table(const std::filesystem::path& path);

struct RepeatPoint {
    std::string group;
    std::size_t lag = 0;
    double probability = 0.0;
};

struct NetOutputs {
    MetricTable metrics;
    std::vector<RepeatPoint> repeat_curve;
};

/// Network metrics for every segment of every group, plus each group's edge-repeat curve up to
/// min(max_lag, segments - 1) over its full segments.
NetOutputs compute_netmetrics(const SegmentedLog& log, const net::ConductanceConfig& conductance,
                              std::size_t max_lag);
MetricTable compute_contentmetrics(const SegmentedLog& log, const content::ContentOptions& options);

void write_repeat_curve(std::ostream& out, const std::vector<RepeatPoint>& curve);

/// Joins network and content tables per group into analysis series, dropping partial segments
/// unless asked, and appends first differences of the standard structural metrics.
std::vector<stats::MetricSeries> assemble_series(const MetricTable& net, const MetricTable& content,
                                                 bool include_partial = false);

/// Network columns of an analysis series (levels, cross-segment measures, differences).
std::vector<std::string> network_columns(const stats::MetricSeries& series);
/// Content columns of an analysis series.
std::vector<std::string> content_columns(const stats::MetricSeries& series);

// ---------------------------------------------------------------------------
// Statistics stages

struct StationarityRow {
    std::string group;
    std::string column;
    std::string test;  ///< "adf" or "pp"
    std::optional<stats::StationarityResult> result;
    std::string note;  ///< reason when result is absent
};

std::vector<StationarityRow> stationarity_table(const std::vector<stats::MetricSeries>& groups,
                                                stats::Deterministic deterministic = stats::Deterministic::Constant);
void write_stationarity(std::ostream& out, const std::vector<StationarityRow>& rows);

/// Every network column paired with every content column.
std::vector<std::pair<std::string, std::string>> all_pairs(const stats::MetricSeries& series);
/// Two-column CSV (var_a,var_b), header optional.
std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& path);

/// Long-format heatmap: var_a, var_b, mean_rho, combined_p, stars, n_groups.
void write_heatmap(std::ostream& out, const stats::CorrelationReport& report);

enum class PredictorSet { Network, Content, All };
PredictorSet parse_predictor_set(std::string_view name);  // throws ConfigError
std::string_view to_string(PredictorSet set);
stats::RegressionMethod parse_method(std::string_view name);  // throws ConfigError
std::string_view to_string(stats::RegressionMethod method);

/// Orderings for the incremental R^2 curve. Predictors within a block are ranked by
/// |Spearman rho| with the target (ties by name); the combined ordering is the network block
/// followed by the content block. Network -> {network}, Content -> {content},
/// All -> {network, content, network+content}.
std::vector<stats::Ordering> curve_orderings(const stats::MetricSeries& series, const std::string& target,
                                             PredictorSet set);

struct GroupCurve {
    std::string group;
    std::vector<stats::CurvePoint> points;
};

std::vector<GroupCurve> regress_groups(const std::vector<stats::MetricSeries>& groups, const std::string& target,
                                       PredictorSet set, stats::RegressionMethod method);
void write_r2_curve(std::ostream& out, const std::vector<GroupCurve>& curves);

/// Highest R^2 along one ordering's curve (NaN if none).
double curve_plateau(const std::vector<stats::CurvePoint>& points, const std::string& ordering);

// ---------------------------------------------------------------------------
// End-to-end run

struct PipelineConfig {
    std::string input;  ///< event log
    ingest::LogFormat format = ingest::LogFormat::Jsonl;
    ingest::PayloadKind payload = ingest::PayloadKind::Numeric;
    std::size_t max_targets = 20;
    std::size_t segment_size = 100;
    bool include_isolated = false;
    bool include_partial = false;
    net::ConductanceConfig conductance;
    std::size_t max_lag = 50;
    content::ContentOptions content;
    stats::Deterministic deterministic = stats::Deterministic::Constant;
    bool screen_stationarity = true;
    std::string pairs = "all";  ///< "all" or a pairs CSV path
    std::string regress_target;  ///< empty: first content column
    PredictorSet predictors = PredictorSet::All;
    stats::RegressionMethod method = stats::RegressionMethod::Nw;

    void validate() const;  // throws ConfigError
};

/// Missing keys keep their defaults; unknown keys and bad values are ConfigErrors.
PipelineConfig parse_pipeline_config(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);

inline const std::vector<std::string>& pipeline_outputs() {
    static const std::vector<std::string> files = {"metrics.csv",  "content.csv",  "repeat_curve.csv",
                                                   "stationarity.csv", "heatmap.csv", "r2_curve.csv"};
    return files;
}

/// Runs every stage and writes pipeline_outputs() plus manifest.json into out_dir. A failing
/// stage is rethrown with its name prefixed and its exit code preserved. `overrides` is
/// recorded verbatim in the manifest.
nlohmann::json run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const nlohmann::json& overrides = nlohmann::json::object());

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `text` to `path` only through a stream opened here; throws InputError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace coevo::pipeline
