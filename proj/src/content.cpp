#include "coevo/content.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

#include "coevo/error.hpp"
#include "coevo/messages.hpp"

namespace coevo::content {

using ingest::EventRecord;
using ingest::Segment;
using ingest::SegmentGraph;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_quote_line(std::string_view line) {
    const auto pos = line.find_first_not_of(" \t");
    return pos != std::string_view::npos && line[pos] == '>';
}

const ingest::TokenList& tokens_of(const EventRecord& e) {
    if (const auto* t = std::get_if<ingest::TokenList>(&e.payload)) return *t;
    throw InputError("expected token payloads, got " + std::string(ingest::to_string(ingest::kind_of(e.payload))));
}

const std::string& asset_of(const EventRecord& e) {
    if (const auto* a = std::get_if<ingest::AssetId>(&e.payload)) return a->id;
    throw InputError("expected asset payloads, got " + std::string(ingest::to_string(ingest::kind_of(e.payload))));
}

double numeric_of(const EventRecord& e) {
    if (const auto* m = std::get_if<ingest::NumericMessage>(&e.payload)) return m->value;
    throw InputError("expected numeric payloads, got " + std::string(ingest::to_string(ingest::kind_of(e.payload))));
}

std::vector<double> values_of(const Segment& s) {
    std::vector<double> out;
    for (const auto* e : unique_documents(s)) out.push_back(numeric_of(*e));
    return out;
}

std::set<std::string> asset_set(const Segment& s) {
    std::set<std::string> out;
    for (const auto* e : unique_documents(s)) out.insert(asset_of(*e));
    return out;
}

// Weak component label per node.
std::vector<std::uint32_t> weak_components(const SegmentGraph& g) {
    std::vector<std::uint32_t> parent(g.node_count());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : g.edges()) {
        const auto a = find(e.source), b = find(e.target);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    for (std::uint32_t v = 0; v < parent.size(); ++v) parent[v] = find(v);
    return parent;
}

enum class PairClass : unsigned char { Direct, Indirect, Disconnected };

// Text units with their vectors and graph positions, sorted by key.
struct Units {
    std::vector<SparseVector> vectors;
    std::vector<std::optional<std::uint32_t>> node;  // graph index of the author, if present
    std::vector<std::optional<std::uint32_t>> component;
};

Units build_units(const Segment& segment, const SegmentGraph& graph, const DocumentFrequencies& corpus, TextUnit unit,
                  bool strip_quotes) {
    std::map<std::string, std::vector<std::string>> texts;  // key -> tokens
    std::map<std::string, std::string> author;
    for (const auto* e : unique_documents(segment)) {
        auto toks = extract_tokens(tokens_of(*e), strip_quotes);
        const std::string& key = unit == TextUnit::User ? e->actor : e->doc_id;
        auto& bucket = texts[key];
        bucket.insert(bucket.end(), toks.begin(), toks.end());
        author.emplace(key, e->actor);
    }
    const auto comp = weak_components(graph);
    Units u;
    for (auto& [key, toks] : texts) {
        if (toks.empty()) continue;  // a unit without text has no defined similarity
        u.vectors.push_back(tfidf_vector(toks, corpus).value);
        const auto idx = graph.index_of(author[key]);
        u.node.push_back(idx);
        u.component.push_back(idx ? std::optional<std::uint32_t>(comp[*idx]) : std::nullopt);
    }
    return u;
}

PairClass classify(const Units& u, const SegmentGraph& g, std::size_t a, std::size_t b) {
    const auto na = u.node[a], nb = u.node[b];
    if (na && nb) {
        if (g.has_edge(*na, *nb) || g.has_edge(*nb, *na)) return PairClass::Direct;
        if (*u.component[a] == *u.component[b]) return PairClass::Indirect;
    }
    return PairClass::Disconnected;
}

ClassSimilarity summarize(std::size_t pairs, auto&& similarity_at, auto&& class_at, TextUnit unit) {
    double sum[3] = {0, 0, 0};
    std::size_t count[3] = {0, 0, 0};
    double total = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double s = similarity_at(k);
        const auto c = static_cast<int>(class_at(k));
        sum[c] += s;
        ++count[c];
        total += s;
    }
    ClassSimilarity out;
    if (pairs > 0) out.all = total / double(pairs);
    if (unit == TextUnit::Document) return out;
    if (count[0]) out.direct = sum[0] / double(count[0]);
    if (count[1]) out.indirect = sum[1] / double(count[1]);
    if (count[2]) out.disconnected = sum[2] / double(count[2]);
    out.direct_pairs = count[0];
    out.indirect_pairs = count[1];
    out.disconnected_pairs = count[2];
    return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2) out.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::vector<std::string> extract_tokens(const ingest::TokenList& payload, bool strip_quotes) {
    std::vector<std::string> out;
    for (const auto& fragment : payload.tokens) {
        std::string_view rest = fragment;
        while (true) {
            const auto nl = rest.find('\n');
            const auto line = rest.substr(0, nl);
            if (!(strip_quotes && is_quote_line(line))) {
                auto toks = tokenize(line);
                out.insert(out.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
            }
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }
    return out;
}

std::vector<const EventRecord*> unique_documents(const Segment& segment) {
    std::unordered_set<std::string_view> seen;
    std::vector<const EventRecord*> out;
    for (const auto& e : segment.events)
        if (seen.insert(e.doc_id).second) out.push_back(&e);
    return out;
}

double asset_entropy(const Segment& segment) {
    std::map<std::string, std::size_t> counts;
    std::size_t n = 0;
    for (const auto* e : unique_documents(segment)) {
        ++counts[asset_of(*e)];
        ++n;
    }
    if (n == 0) throw InputError("asset entropy of an empty segment");
    double h = 0.0;
    for (const auto& [asset, c] : counts) {
        const double p = double(c) / double(n);
        h -= p * std::log2(p);
    }
    return h;
}

Flagged<double> asset_jaccard(const Segment& current, const Segment& previous) {
    const auto a = asset_set(current);
    const auto b = asset_set(previous);
    if (a.empty() && b.empty()) return {0.0, true};
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    return {double(common) / double(a.size() + b.size() - common), false};
}

DocumentFrequencies DocumentFrequencies::from_documents(std::span<const std::vector<std::string>> documents) {
    DocumentFrequencies out;
    out.documents_ = documents.size();
    for (const auto& doc : documents) {
        std::set<std::string> unique(doc.begin(), doc.end());
        for (const auto& t : unique) ++out.df_[t];
    }
    return out;
}

DocumentFrequencies DocumentFrequencies::from_segments(std::span<const Segment> segments, bool strip_quotes) {
    std::vector<std::vector<std::string>> docs;
    std::unordered_set<std::string> seen;
    for (const auto& s : segments)
        for (const auto& e : s.events)
            if (seen.insert(e.doc_id).second) docs.push_back(extract_tokens(tokens_of(e), strip_quotes));
    return from_documents(docs);
}

std::size_t DocumentFrequencies::frequency(const std::string& token) const {
    auto it = df_.find(token);
    return it == df_.end() ? 0 : it->second;
}

Flagged<SparseVector> tfidf_vector(std::span<const std::string> tokens, const DocumentFrequencies& corpus) {
    if (tokens.empty()) return {{}, true};
    if (corpus.documents() == 0) throw ConfigError("TF-IDF needs a corpus with at least one document");
    std::map<std::string, std::size_t> tf;
    for (const auto& t : tokens) ++tf[t];
    const double n = double(corpus.documents());
    SparseVector v;
    v.reserve(tf.size());
    for (const auto& [token, count] : tf) {
        const double idf = std::log(n / (1.0 + double(corpus.frequency(token)))) + 1.0;
        v.emplace_back(token, double(count) * idf);
    }
    return {std::move(v), false};
}

Flagged<double> cosine_similarity(const SparseVector& x, const SparseVector& y) {
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (const auto& [t, w] : x) nx += w * w;
    for (const auto& [t, w] : y) ny += w * w;
    if (nx == 0.0 || ny == 0.0) return {0.0, true};
    for (auto i = x.begin(), j = y.begin(); i != x.end() && j != y.end();) {
        const int cmp = i->first.compare(j->first);
        if (cmp < 0) ++i;
        else if (cmp > 0) ++j;
        else { dot += i->second * j->second; ++i; ++j; }
    }
    return {std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), 0.0, 1.0), false};
}

ClassSimilarity pairwise_similarity_by_class(const Segment& segment, const SegmentGraph& graph,
                                             const DocumentFrequencies& corpus, TextUnit unit, bool strip_quotes) {
    const auto units = build_units(segment, graph, corpus, unit, strip_quotes);
    const std::size_t n = units.vectors.size();
    const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
    std::vector<double> sim(pairs);
    std::vector<PairClass> cls(pairs);
    const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t a = 0; a < rows; ++a) {
        // offset of pair (a, a+1) in row-major upper-triangle order
        std::size_t k = std::size_t(a) * (2 * n - std::size_t(a) - 1) / 2;
        for (std::size_t b = std::size_t(a) + 1; b < n; ++b, ++k) {
            sim[k] = cosine_similarity(units.vectors[a], units.vectors[b]).value;
            cls[k] = classify(units, graph, std::size_t(a), b);
        }
    }
    return summarize(
        pairs, [&](std::size_t k) { return sim[k]; }, [&](std::size_t k) { return cls[k]; }, unit);
}

ClassSimilarity pairwise_similarity_by_class_reference(const Segment& segment, const SegmentGraph& graph,
                                                       const DocumentFrequencies& corpus, TextUnit unit,
                                                       bool strip_quotes) {
    const auto units = build_units(segment, graph, corpus, unit, strip_quotes);
    const std::size_t n = units.vectors.size();
    std::vector<std::pair<double, PairClass>> scored;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            scored.emplace_back(cosine_similarity(units.vectors[a], units.vectors[b]).value,
                                classify(units, graph, a, b));
    return summarize(
        scored.size(), [&](std::size_t k) { return scored[k].first; },
        [&](std::size_t k) { return scored[k].second; }, unit);
}

std::vector<double> language_model(const TokenCounts& counts, std::span<const std::string> vocabulary, double alpha) {
    if (vocabulary.empty()) throw ConfigError("language model over an empty vocabulary");
    if (!(alpha > 0.0)) throw ConfigError("smoothing alpha must be > 0");
    std::size_t total = 0;
    for (const auto& [t, c] : counts) total += c;
    const double denom = double(total) + alpha * double(vocabulary.size());
    std::vector<double> p;
    p.reserve(vocabulary.size());
    for (const auto& w : vocabulary) {
        auto it = counts.find(w);
        p.push_back((double(it == counts.end() ? 0 : it->second) + alpha) / denom);
    }
    return p;
}

double symmetric_kl(std::span<const double> p, std::span<const double> q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += (p[i] - q[i]) * std::log(p[i] / q[i]);
    return d;
}

namespace {

TokenCounts filtered_counts(const Segment& s, NodeFilter filter, bool strip_quotes) {
    std::unordered_set<std::string_view> active;
    if (filter == NodeFilter::NonIsolated) {
        for (const auto& e : s.events) {
            if (e.targets.empty()) continue;
            active.insert(e.actor);
            for (const auto& t : e.targets) active.insert(t);
        }
    }
    TokenCounts counts;
    for (const auto* e : unique_documents(s)) {
        if (filter == NodeFilter::NonIsolated && !active.contains(e->actor)) continue;
        for (auto& t : extract_tokens(tokens_of(*e), strip_quotes)) ++counts[t];
    }
    return counts;
}

}  // namespace

std::optional<double> lm_divergence(const Segment& current, const Segment& previous, double alpha, NodeFilter filter,
                                    bool strip_quotes) {
    const auto a = filtered_counts(current, filter, strip_quotes);
    const auto b = filtered_counts(previous, filter, strip_quotes);
    if (a.empty() || b.empty()) return std::nullopt;
    std::vector<std::string> vocab;
    for (const auto& [t, c] : a) vocab.push_back(t);
    for (const auto& [t, c] : b) vocab.push_back(t);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    const auto p = language_model(a, vocab, alpha);
    const auto q = language_model(b, vocab, alpha);
    return symmetric_kl(p, q);
}

std::vector<std::string> content_columns(ingest::PayloadKind kind) {
    switch (kind) {
        case ingest::PayloadKind::Tokens:
            return {"sim_direct", "sim_indirect", "sim_disconnected", "sim_all", "lm_dist_all", "lm_dist_noniso"};
        case ingest::PayloadKind::Asset: return {"asset_entropy", "asset_jaccard"};
        case ingest::PayloadKind::Numeric:
            return {"msg_entropy", "msg_sd", "msg_jaccard", "msg_distance", "msg_distance_sum"};
    }
    return {};
}

ContentTable compute_content_series(std::span<const Segment> segments, std::span<const SegmentGraph> graphs,
                                    ingest::PayloadKind kind, const DocumentFrequencies& corpus,
                                    const ContentOptions& options) {
    if (segments.size() != graphs.size()) throw std::invalid_argument("segments and graphs differ in length");
    ContentTable table;
    table.columns = content_columns(kind);
    table.rows.assign(segments.size(), std::vector<double>(table.columns.size(), kNaN));
    auto opt = [](const std::optional<double>& v) { return v.value_or(kNaN); };

    for (std::size_t t = 0; t < segments.size(); ++t) {
        auto& row = table.rows[t];
        const auto& seg = segments[t];
        switch (kind) {
            case ingest::PayloadKind::Tokens: {
                const auto sim =
                    pairwise_similarity_by_class(seg, graphs[t], corpus, options.text_unit, options.strip_quotes);
                row[0] = opt(sim.direct);
                row[1] = opt(sim.indirect);
                row[2] = opt(sim.disconnected);
                row[3] = opt(sim.all);
                if (t > 0) {
                    row[4] = opt(lm_divergence(seg, segments[t - 1], options.alpha, NodeFilter::All,
                                               options.strip_quotes));
                    row[5] = opt(lm_divergence(seg, segments[t - 1], options.alpha, NodeFilter::NonIsolated,
                                               options.strip_quotes));
                }
                break;
            }
            case ingest::PayloadKind::Asset: {
                if (!seg.events.empty()) row[0] = asset_entropy(seg);
                if (t > 0) {
                    const auto j = asset_jaccard(seg, segments[t - 1]);
                    if (!j.degenerate) row[1] = j.value;
                }
                break;
            }
            case ingest::PayloadKind::Numeric: {
                const auto values = values_of(seg);
                if (!values.empty()) {
                    row[0] = sim::message_entropy(values);
                    row[1] = sim::message_sd(values);
                }
                if (t > 0) {
                    const auto prev = values_of(segments[t - 1]);
                    row[2] = opt(sim::message_jaccard(values, prev));
                    row[3] = opt(sim::message_distance(values, prev, sim::DistanceMode::CrossPairMean));
                    row[4] = opt(sim::message_distance(values, prev, sim::DistanceMode::CrossPairSum));
                }
                break;
            }
        }
    }
    return table;
}

}  // namespace coevo::content
