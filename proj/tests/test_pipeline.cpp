#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/pipeline.hpp"
#include "coevo/sim.hpp"

namespace fs = std::filesystem;
using namespace coevo;
namespace pl = coevo::pipeline;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("coevo_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Simulated numeric log shared by the end-to-end cases.
const fs::path& simulated_log() {
    static const fs::path path = [] {
        const auto dir = scratch("simlog");
        sim::SimConfig c;
        c.seed = 7;
        c.total_messages = 6000;
        std::ostringstream out;
        ingest::serialize_events(out, sim::run_simulation(c).events, ingest::LogFormat::Jsonl);
        pl::write_text_file(dir / "events.jsonl", out.str());
        return dir / "events.jsonl";
    }();
    return path;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(COEVO_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("metric table round trip keeps missing values") {
    pl::MetricTable t;
    t.columns = {"x", "y"};
    t.group = {"g", "g"};
    t.segment = {0, 1};
    t.partial = {false, true};
    t.rows = {{1.5, std::nan("")}, {1.0 / 3.0, -2e-7}};
    std::stringstream s;
    pl::write_metric_table(s, t);
    CHECK(s.str() == "group,segment,partial,x,y\ng,0,0,1.5,\ng,1,1,0.333333333,-2e-07\n");
    const auto back = pl::read_metric_table(s);
    CHECK(back.columns == t.columns);
    CHECK(back.partial == t.partial);
    CHECK(std::isnan(back.rows[0][1]));
    CHECK(back.rows[1][0] == 0.333333333);
    std::istringstream bad("group,segment,partial,x\ng,zero,0,1\n");
    CHECK_THROWS_AS(pl::read_metric_table(bad), ParseError);
}

TEST_CASE("heatmap rows and star bands") {
    stats::CorrelationReport r;
    r.pairs.push_back({"a", "b", 1.0, 0.0, "***", {"g"}, {1.0}, {0.0}});
    r.pairs.push_back({"a", "c", 0.2, 0.05, std::string(stats::stars(0.05)), {"g"}, {0.2}, {0.05}});
    r.pairs.push_back({"a", "d", 0.3, 0.005, std::string(stats::stars(0.005)), {"g"}, {0.3}, {0.005}});
    std::ostringstream out;
    pl::write_heatmap(out, r);
    CHECK(out.str() ==
          "var_a,var_b,mean_rho,combined_p,stars,n_groups\n"
          "a,b,1,0,***,1\n"
          "a,c,0.2,0.05,*,1\n"
          "a,d,0.3,0.005,**,1\n");
}

TEST_CASE("pipeline config schema") {
    CHECK_THROWS_AS(pl::parse_pipeline_config({{"input", "x"}, {"segment_size", 0}}), ConfigError);
    CHECK_THROWS_AS(pl::parse_pipeline_config({{"input", "x"}, {"segmnet_size", 10}}), ConfigError);
    CHECK_THROWS_AS(pl::parse_pipeline_config({{"input", "x"}, {"method", "svm"}}), ConfigError);
    CHECK_THROWS_AS(pl::parse_pipeline_config(nlohmann::json::object()), ConfigError);
    const auto c = pl::parse_pipeline_config({{"input", "x"}, {"conductance", {{"max_path_len", nullptr}}}});
    CHECK(c.conductance.max_path_len == std::numeric_limits<std::size_t>::max());
    const auto j = pl::to_json(c);
    CHECK(pl::to_json(pl::parse_pipeline_config(j)) == j);
}

TEST_CASE("segmented directory round trip") {
    const auto dir = scratch("segments");
    const auto parsed = pl::load_events(simulated_log(), {ingest::LogFormat::Jsonl, ingest::PayloadKind::Numeric, 20});
    auto log = pl::segment_log(parsed.events, ingest::PayloadKind::Numeric, 250, false);
    log.parse_stats = parsed.stats;
    pl::write_segments(dir, log);
    const auto back = pl::read_segments(dir);
    REQUIRE(back.groups.size() == 1);
    CHECK(back.segment_size == 250);
    CHECK(back.parse_stats.lines == parsed.stats.lines);
    REQUIRE(back.groups[0].segments.size() == log.groups[0].segments.size());
    for (std::size_t i = 0; i < back.groups[0].segments.size(); ++i)
        CHECK(back.groups[0].segments[i].events == log.groups[0].segments[i].events);
    CHECK_THROWS_AS(pl::read_segments(dir / "missing"), InputError);
}

TEST_CASE("end-to-end pipeline on a simulated log is reproducible") {
    const auto root = scratch("pipeline");
    pl::PipelineConfig c;
    c.input = simulated_log().string();
    const auto m1 = pl::run_pipeline(c, root / "a");
    std::set<std::string> files;
    for (const auto& e : fs::directory_iterator(root / "a")) files.insert(e.path().filename().string());
    std::set<std::string> expected(pl::pipeline_outputs().begin(), pl::pipeline_outputs().end());
    expected.insert("manifest.json");
    CHECK(files == expected);
    CHECK(m1["inputs"][0]["sha256"] == pl::sha256_file(simulated_log()));
    CHECK(m1["config"]["segment_size"] == 100);

    const auto m2 = pl::run_pipeline(pl::parse_pipeline_config(m1["config"]), root / "b", m1["overrides"]);
    CHECK(m1 == m2);
    for (const auto& f : expected) CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));

    std::set<std::string> top;
    for (const auto& e : fs::directory_iterator(root)) top.insert(e.path().filename().string());
    CHECK(top == std::set<std::string>{"a", "b"});
}

TEST_CASE("pipeline failures name the stage and keep the exit code") {
    const auto root = scratch("failures");
    pl::PipelineConfig c;
    c.input = (root / "absent.jsonl").string();
    try {
        pl::run_pipeline(c, root / "out");
        FAIL("expected InputError");
    } catch (const Error& e) {
        CHECK(e.code() == ExitCode::Input);
    }
    c.input = simulated_log().string();
    c.regress_target = "not_a_column";
    try {
        pl::run_pipeline(c, root / "out");
        FAIL("expected failure in regress");
    } catch (const Error& e) {
        CHECK(e.code() == ExitCode::Config);
        CHECK(std::string(e.what()).rfind("stage regress:", 0) == 0);
    }
}

TEST_CASE("sha256 of a known string") {
    const auto dir = scratch("sha");
    pl::write_text_file(dir / "abc", "abc");
    CHECK(pl::sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("command line exit codes and staged equivalence") {
    const auto root = scratch("cli");
    const auto log = simulated_log().string();
    const auto r = root.string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("ingest --input " + r + "/nope.jsonl --payload numeric --out " + r + "/seg") == 3);
    CHECK(run_cli("ingest --input " + log + " --payload tokens --out " + r + "/seg") == 3);
    CHECK(run_cli("ingest --input " + log + " --payload numeric --segment-size 0 --out " + r + "/seg") == 2);
    REQUIRE(run_cli("--workers 2 ingest --input " + log + " --payload numeric --out " + r + "/seg") == 0);
    REQUIRE(run_cli("netmetrics --segments " + r + "/seg --out " + r + "/metrics.csv") == 0);
    CHECK(fs::exists(root / "repeat_curve.csv"));
    REQUIRE(run_cli("contentmetrics --segments " + r + "/seg --out " + r + "/content.csv") == 0);
    REQUIRE(run_cli("stationarity --metrics " + r + "/metrics.csv " + r + "/content.csv --out " + r + "/st.csv") == 0);
    REQUIRE(run_cli("correlate --groups " + r + " --out " + r + "/heatmap.csv") == 0);
    REQUIRE(run_cli("regress --groups " + r + " --target msg_entropy --out " + r + "/r2.csv") == 0);
    CHECK(run_cli("regress --groups " + r + " --target missing --out " + r + "/r2x.csv") == 2);

    pl::write_text_file(root / "cfg.json", nlohmann::json{{"input", log}}.dump());
    REQUIRE(run_cli("pipeline --config " + r + "/cfg.json --out " + r + "/full") == 0);
    for (auto [staged, full] : {std::pair{"metrics.csv", "metrics.csv"}, {"content.csv", "content.csv"},
                                {"repeat_curve.csv", "repeat_curve.csv"}, {"st.csv", "stationarity.csv"},
                                {"heatmap.csv", "heatmap.csv"}, {"r2.csv", "r2_curve.csv"}})
        CHECK(slurp(root / staged) == slurp(root / "full" / full));

    REQUIRE(run_cli("pipeline --manifest " + r + "/full/manifest.json --out " + r + "/again") == 0);
    CHECK(slurp(root / "full" / "manifest.json") == slurp(root / "again" / "manifest.json"));
    pl::write_text_file(root / "bad.json", R"({"input":"x","segment_size":0})");
    CHECK(run_cli("pipeline --config " + r + "/bad.json --out " + r + "/bad") == 2);
    CHECK_FALSE(fs::exists(root / "bad"));

    REQUIRE(run_cli("simulate --seed 3 --messages 1500 --out " + r + "/s1.jsonl --report " + r + "/s1.json") == 0);
    REQUIRE(run_cli("simulate --config " + r + "/s1.json --out " + r + "/s2.jsonl --report " + r + "/s2.json") == 0);
    CHECK(slurp(root / "s1.jsonl") == slurp(root / "s2.jsonl"));
    CHECK(slurp(root / "s1.json") == slurp(root / "s2.json"));
    CHECK(run_cli("simulate --messages 10 --config " + r + "/nope.json") == 3);
}
