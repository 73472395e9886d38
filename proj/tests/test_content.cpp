#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "coevo/content.hpp"
#include "coevo/error.hpp"
#include "coevo/messages.hpp"

using namespace coevo;
using namespace coevo::ingest;
using namespace coevo::content;

namespace {

EventRecord asset(std::string actor, std::vector<std::string> to, std::string doc, std::string id) {
    return {0, std::move(actor), std::move(to), std::move(doc), AssetId{std::move(id)}, std::nullopt};
}

EventRecord text(std::string actor, std::vector<std::string> to, std::string doc, std::string body) {
    return {0, std::move(actor), std::move(to), std::move(doc), TokenList{{std::move(body)}}, std::nullopt};
}

Segment seg(std::vector<EventRecord> ev) {
    Segment s;
    s.events = std::move(ev);
    return s;
}

Segment assets(std::initializer_list<const char*> ids) {
    Segment s;
    int i = 0;
    for (auto id : ids) s.events.push_back(asset("a", {"b"}, std::to_string(i++), id));
    return s;
}

// tf * (ln(N/(1+df)) + 1), written out independently of the library.
std::map<std::string, double> weights(const std::vector<std::string>& doc, const std::map<std::string, int>& df,
                                      int n) {
    std::map<std::string, double> w;
    for (const auto& t : doc) w[t] += 1.0;
    for (auto& [t, v] : w) v *= std::log(double(n) / (1.0 + (df.count(t) ? df.at(t) : 0))) + 1.0;
    return w;
}

double cosine(const std::map<std::string, double>& x, const std::map<std::string, double>& y) {
    double dot = 0, nx = 0, ny = 0;
    for (auto& [t, v] : x) {
        nx += v * v;
        if (y.count(t)) dot += v * y.at(t);
    }
    for (auto& [t, v] : y) ny += v * v;
    return nx == 0 || ny == 0 ? 0.0 : dot / std::sqrt(nx * ny);
}

}  // namespace

TEST_CASE("tokenization") {
    CHECK(tokenize("Hello, World! a b2 x_y 42") == std::vector<std::string>{"hello", "world", "b2", "42"});
    CHECK(tokenize("").empty());
    CHECK(extract_tokens(TokenList{{"keep this\n> quoted line\n  > also quoted\nend"}}, true) ==
          std::vector<std::string>{"keep", "this", "end"});
    CHECK(extract_tokens(TokenList{{"> q"}}, false) == std::vector<std::string>{});
    CHECK(extract_tokens(TokenList{{"> qq"}}, false) == std::vector<std::string>{"qq"});
}

TEST_CASE("asset entropy fixtures") {
    CHECK(asset_entropy(assets({"x", "x", "x"})) == 0.0);
    CHECK(asset_entropy(assets({"a", "b", "c", "d", "e", "f", "g", "h"})) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(asset_entropy(assets({"x", "x", "y", "z"})) - 1.5) < 1e-12);
    CHECK_THROWS_AS(asset_entropy(seg({text("a", {}, "1", "hi")})), InputError);
}

TEST_CASE("asset entropy bounded by log2 of distinct assets") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 40; ++t) {
        Segment s;
        std::set<std::string> distinct;
        for (int i = 0; i < 30; ++i) {
            auto id = "k" + std::to_string(rng() % 9);
            distinct.insert(id);
            s.events.push_back(asset("a", {"b"}, std::to_string(i), id));
        }
        CHECK(asset_entropy(s) <= std::log2(double(distinct.size())) + 1e-12);
    }
}

TEST_CASE("asset jaccard fixtures") {
    CHECK(asset_jaccard(assets({"x", "y"}), assets({"y", "x", "x"})).value == 1.0);
    CHECK(asset_jaccard(assets({"x"}), assets({"y"})).value == 0.0);
    CHECK(std::abs(asset_jaccard(assets({"x", "y"}), assets({"y", "z"})).value - 1.0 / 3.0) < 1e-15);
    const auto empty = asset_jaccard(Segment{}, Segment{});
    CHECK(empty.value == 0.0);
    CHECK(empty.degenerate);
}

TEST_CASE("tf-idf fixtures") {
    const std::vector<std::vector<std::string>> corpus_docs = {{"a", "a", "b"}};
    const auto df = DocumentFrequencies::from_documents(corpus_docs);
    const auto v = tfidf_vector(corpus_docs[0], df);
    REQUIRE(v.value.size() == 2);
    CHECK(v.value[0].first == "a");
    CHECK(std::abs(v.value[0].second - 2.0 * (std::log(0.5) + 1.0)) < 1e-12);
    CHECK(std::abs(v.value[1].second - 1.0 * (std::log(0.5) + 1.0)) < 1e-12);
    const std::vector<std::string> nothing;
    CHECK(tfidf_vector(nothing, df).degenerate);
    const std::vector<std::string> unseen = {"zz"};
    CHECK(std::abs(tfidf_vector(unseen, df).value[0].second - (std::log(1.0) + 1.0)) < 1e-12);
}

TEST_CASE("cosine fixtures") {
    const SparseVector x = {{"a", 1}, {"b", 1}}, y = {{"a", 1}, {"c", 1}}, z = {{"d", 2}};
    CHECK(std::abs(cosine_similarity(x, x).value - 1.0) < 1e-15);
    CHECK(cosine_similarity(x, z).value == 0.0);
    CHECK(std::abs(cosine_similarity(x, y).value - 0.5) < 1e-15);
    const auto zero = cosine_similarity({}, x);
    CHECK(zero.value == 0.0);
    CHECK(zero.degenerate);
}

TEST_CASE("pairwise similarity: two linked users with identical text") {
    const auto s = seg({text("a", {"b"}, "1", "red fox"), text("b", {"a"}, "2", "red fox")});
    const auto g = build_segment_graph(s, true);
    const auto df = DocumentFrequencies::from_segments(std::span(&s, 1), false);
    const auto r = pairwise_similarity_by_class(s, g, df);
    REQUIRE(r.direct.has_value());
    CHECK(std::abs(*r.direct - 1.0) < 1e-12);
    CHECK_FALSE(r.indirect.has_value());
    CHECK_FALSE(r.disconnected.has_value());
}

TEST_CASE("pairwise similarity: isolated users with disjoint text") {
    const auto s = seg({text("a", {}, "1", "red fox"), text("b", {}, "2", "blue owl")});
    const auto g = build_segment_graph(s, true);
    const auto df = DocumentFrequencies::from_segments(std::span(&s, 1), false);
    const auto r = pairwise_similarity_by_class(s, g, df);
    REQUIRE(r.disconnected.has_value());
    CHECK(*r.disconnected == 0.0);
}

TEST_CASE("pairwise similarity: chain a-b-c plus isolated d equals pair enumeration") {
    const auto s = seg({text("a", {"b"}, "1", "red fox jumps"), text("b", {"c"}, "2", "fox lazy dog"),
                        text("c", {}, "3", "lazy red cat"), text("d", {}, "4", "cat dog owl owl")});
    const auto g = build_segment_graph(s, true);
    const auto df = DocumentFrequencies::from_segments(std::span(&s, 1), false);
    const auto r = pairwise_similarity_by_class(s, g, df);

    const std::map<std::string, std::vector<std::string>> docs = {{"a", {"red", "fox", "jumps"}},
                                                                  {"b", {"fox", "lazy", "dog"}},
                                                                  {"c", {"lazy", "red", "cat"}},
                                                                  {"d", {"cat", "dog", "owl", "owl"}}};
    std::map<std::string, int> dfs;
    for (auto& [u, d] : docs)
        for (auto& t : std::set<std::string>(d.begin(), d.end())) dfs[t]++;
    auto sim = [&](const char* u, const char* v) { return cosine(weights(docs.at(u), dfs, 4), weights(docs.at(v), dfs, 4)); };
    const double direct = (sim("a", "b") + sim("b", "c")) / 2;
    const double indirect = sim("a", "c");
    const double disconnected = (sim("a", "d") + sim("b", "d") + sim("c", "d")) / 3;
    REQUIRE(r.direct_pairs == 2);
    REQUIRE(r.indirect_pairs == 1);
    REQUIRE(r.disconnected_pairs == 3);
    CHECK(std::abs(*r.direct - direct) < 1e-12);
    CHECK(std::abs(*r.indirect - indirect) < 1e-12);
    CHECK(std::abs(*r.disconnected - disconnected) < 1e-12);
    CHECK(std::abs(*r.all - (2 * direct + indirect + 3 * disconnected) / 6) < 1e-12);
}

TEST_CASE("pairwise similarity parallel equals serial reference") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    for (int t = 0; t < 8; ++t) {
        Segment s;
        for (int i = 0; i < 80; ++i) {
            std::string body;
            for (int k = 0; k < 5; ++k) body += vocab[rng() % vocab.size()] + " ";
            std::vector<std::string> to;
            if (rng() % 2) to.push_back("u" + std::to_string(rng() % 25));
            s.events.push_back(text("u" + std::to_string(rng() % 25), to, std::to_string(i), body));
        }
        const auto g = build_segment_graph(s, true);
        const auto df = DocumentFrequencies::from_segments(std::span(&s, 1), false);
        for (auto unit : {TextUnit::User, TextUnit::Document}) {
            const auto p = pairwise_similarity_by_class(s, g, df, unit);
            const auto q = pairwise_similarity_by_class_reference(s, g, df, unit);
            CHECK(p.all == q.all);
            CHECK(p.direct == q.direct);
            CHECK(p.indirect == q.indirect);
            CHECK(p.disconnected == q.disconnected);
            if (unit == TextUnit::User) {
                const double n = double(p.direct_pairs + p.indirect_pairs + p.disconnected_pairs);
                double weighted = 0;
                if (p.direct) weighted += *p.direct * double(p.direct_pairs);
                if (p.indirect) weighted += *p.indirect * double(p.indirect_pairs);
                if (p.disconnected) weighted += *p.disconnected * double(p.disconnected_pairs);
                CHECK(std::abs(*p.all - weighted / n) < 1e-12);
                for (auto v : {p.direct, p.indirect, p.disconnected, p.all})
                    if (v) CHECK((*v >= 0.0 && *v <= 1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("language model smoothing") {
    const TokenCounts counts = {{"a", 2}, {"b", 1}};
    const std::vector<std::string> vocab = {"a", "b", "c"};
    const auto p = language_model(counts, vocab, 0.01);
    CHECK(std::abs(p[0] - 2.01 / 3.03) < 1e-15);
    CHECK(std::abs(p[1] - 1.01 / 3.03) < 1e-15);
    CHECK(std::abs(p[2] - 0.01 / 3.03) < 1e-15);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-12);
    const auto u = language_model({{"a", 4}, {"b", 4}, {"c", 4}}, vocab, 0.5);
    for (double x : u) CHECK(std::abs(x - 1.0 / 3.0) < 1e-15);
    const auto limit = language_model(counts, std::vector<std::string>{"a", "b"}, 1e-12);
    CHECK(std::abs(limit[0] - 2.0 / 3.0) < 1e-9);
    CHECK_THROWS_AS(language_model(counts, std::vector<std::string>{}, 0.01), ConfigError);
    CHECK_THROWS_AS(language_model(counts, vocab, 0.0), ConfigError);
}

TEST_CASE("symmetric KL fixtures") {
    const std::vector<double> p = {0.75, 0.25}, q = {0.25, 0.75};
    CHECK(std::abs(symmetric_kl(p, q) - std::log(3.0)) < 1e-12);
    CHECK(symmetric_kl(p, p) == 0.0);
    CHECK(symmetric_kl(p, q) == symmetric_kl(q, p));
}

TEST_CASE("lm divergence on segments") {
    const auto s1 = seg({text("a", {"b"}, "1", "red red fox"), text("c", {}, "2", "owl")});
    const auto s2 = seg({text("a", {"b"}, "3", "blue fox fox")});
    CHECK(lm_divergence(s1, s1, 0.01) == 0.0);
    const auto d12 = lm_divergence(s1, s2, 0.01), d21 = lm_divergence(s2, s1, 0.01);
    REQUIRE(d12.has_value());
    CHECK(*d12 > 0.0);
    CHECK(std::abs(*d12 - *d21) < 1e-12);
    // Non-isolated filter drops c's broadcast document.
    const auto nonisolated = lm_divergence(s1, s2, 0.01, NodeFilter::NonIsolated);
    REQUIRE(nonisolated.has_value());
    CHECK(*nonisolated != *d12);
    CHECK_FALSE(lm_divergence(seg({text("a", {}, "1", "!")}), s1, 0.01).has_value());
    CHECK_FALSE(lm_divergence(seg({text("c", {}, "1", "owl")}), s2, 0.01, NodeFilter::NonIsolated).has_value());
}

TEST_CASE("lm divergence shrinks as one segment is converted into the other") {
    std::vector<std::string> target = {"aa", "bb", "cc", "dd", "ee", "ff", "gg", "hh"};
    std::vector<std::string> moving = {"zz", "yy", "xx", "ww", "vv", "uu", "tt", "ss"};
    auto as_seg = [](const std::vector<std::string>& toks) {
        std::string body;
        for (auto& t : toks) body += t + " ";
        return seg({text("a", {"b"}, "1", body)});
    };
    double prev = *lm_divergence(as_seg(moving), as_seg(target), 0.01);
    for (std::size_t k = 0; k < moving.size(); ++k) {
        moving[k] = target[k];
        const double d = *lm_divergence(as_seg(moving), as_seg(target), 0.01);
        CHECK(d < prev);
        CHECK(d >= 0.0);
        prev = d;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("message metrics") {
    const std::vector<double> c = {10, 10}, p = {20, 20};
    CHECK(sim::message_distance(c, c) == 0.0);
    CHECK(sim::message_distance(c, p) == 10.0);
    const std::vector<double> a = {1, 3}, b = {2, 6};
    CHECK(sim::message_distance(a, b) == 2.5);
    CHECK(sim::message_distance(a, b, sim::DistanceMode::CrossPairSum) == 10.0);
    CHECK_FALSE(sim::message_distance({}, b).has_value());
    const std::vector<double> four = {1, 2, 3, 4};
    CHECK(sim::message_entropy(four) == 2.0);
    CHECK(sim::message_sd(c) == 0.0);
    CHECK(std::abs(sim::message_sd(four) - std::sqrt(1.25)) < 1e-15);
    CHECK(sim::message_jaccard(a, std::vector<double>{3, 4}) == 1.0 / 3.0);
}

TEST_CASE("content series: inapplicable columns are missing, not zero") {
    std::vector<Segment> segs = {assets({"x", "y"}), assets({"y", "z"})};
    std::vector<SegmentGraph> gs;
    for (auto& s : segs) gs.push_back(build_segment_graph(s, false));
    const auto t = compute_content_series(segs, gs, PayloadKind::Asset, {}, {});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.columns == content_columns(PayloadKind::Asset));
    CHECK(t.rows[0][0] == 1.0);
    CHECK(std::isnan(t.rows[0][1]));
    CHECK(std::abs(t.rows[1][1] - 1.0 / 3.0) < 1e-15);
}
