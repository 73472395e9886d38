#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coevo/events.hpp"
#include "coevo/flagged.hpp"
#include "coevo/segment.hpp"

namespace coevo::content {

// ---------------------------------------------------------------------------
// Tokenization

/// Lowercases ASCII, splits on runs of non-alphanumeric characters, drops tokens shorter
/// than two characters.
std::vector<std::string> tokenize(std::string_view text);

/// Tokens of a document. With strip_quotes, lines starting with '>' (after leading
/// whitespace) are dropped first.
std::vector<std::string> extract_tokens(const ingest::TokenList& payload, bool strip_quotes = false);

/// One representative event per doc_id, in first-appearance order.
std::vector<const ingest::EventRecord*> unique_documents(const ingest::Segment& segment);

// ---------------------------------------------------------------------------
// Discrete assets

/// Entropy in bits of the segment's asset distribution. Throws InputError for other payloads.
double asset_entropy(const ingest::Segment& segment);

/// Jaccard overlap of asset sets; both empty gives 0 flagged degenerate.
Flagged<double> asset_jaccard(const ingest::Segment& current, const ingest::Segment& previous);

// ---------------------------------------------------------------------------
// TF-IDF and cosine similarity

/// Sparse term weights sorted by token.
using SparseVector = std::vector<std::pair<std::string, double>>;

/// Corpus document frequencies; one document per doc_id.
class DocumentFrequencies {
public:
    DocumentFrequencies() = default;
    static DocumentFrequencies from_documents(std::span<const std::vector<std::string>> documents);
    static DocumentFrequencies from_segments(std::span<const ingest::Segment> segments, bool strip_quotes);

    std::size_t documents() const noexcept { return documents_; }
    std::size_t frequency(const std::string& token) const;

private:
    std::size_t documents_ = 0;
    std::unordered_map<std::string, std::size_t> df_;
};

/// weight(w) = tf(w) * (ln(N / (1 + df(w))) + 1). An empty document yields an empty vector
/// flagged degenerate.
Flagged<SparseVector> tfidf_vector(std::span<const std::string> tokens, const DocumentFrequencies& corpus);

/// <x,y> / (|x||y|); 0 flagged degenerate when either norm is zero.
Flagged<double> cosine_similarity(const SparseVector& x, const SparseVector& y);

// ---------------------------------------------------------------------------
// Pairwise similarity stratified by connectivity

enum class TextUnit {
    User,      ///< concatenate each actor's documents (broadcast-heavy logs)
    Document,  ///< each document on its own (email-like logs)
};

struct ClassSimilarity {
    std::optional<double> direct;
    std::optional<double> indirect;
    std::optional<double> disconnected;
    std::optional<double> all;
    std::size_t direct_pairs = 0;
    std::size_t indirect_pairs = 0;
    std::size_t disconnected_pairs = 0;
};

/// Mean cosine similarity over unordered text-unit pairs, by class: direct (an edge in either
/// direction), indirect (same weak component, no edge), disconnected (different components).
/// In Document mode only `all` is populated. Pairs are scored in parallel and reduced in a
/// fixed order.
ClassSimilarity pairwise_similarity_by_class(const ingest::Segment& segment, const ingest::SegmentGraph& graph,
                                             const DocumentFrequencies& corpus, TextUnit unit = TextUnit::User,
                                             bool strip_quotes = false);

/// Serial reference for pairwise_similarity_by_class.
ClassSimilarity pairwise_similarity_by_class_reference(const ingest::Segment& segment,
                                                       const ingest::SegmentGraph& graph,
                                                       const DocumentFrequencies& corpus,
                                                       TextUnit unit = TextUnit::User, bool strip_quotes = false);

// ---------------------------------------------------------------------------
// Language models

using TokenCounts = std::map<std::string, std::size_t>;

/// Additively smoothed distribution over `vocabulary` (sorted, unique):
/// p(w) = (count(w) + alpha) / (total + alpha * |vocabulary|). Throws ConfigError on an
/// empty vocabulary or non-positive alpha.
std::vector<double> language_model(const TokenCounts& counts, std::span<const std::string> vocabulary, double alpha);

/// Sum over w of (p(w) - q(w)) * ln(p(w) / q(w)), in nats.
double symmetric_kl(std::span<const double> p, std::span<const double> q);

enum class NodeFilter {
    All,
    NonIsolated,  ///< only documents whose author had an in-segment directed interaction
};

/// Symmetric KL divergence between the smoothed language models of two segments over their
/// union vocabulary. nullopt when either filtered segment has no tokens.
std::optional<double> lm_divergence(const ingest::Segment& current, const ingest::Segment& previous, double alpha,
                                    NodeFilter filter = NodeFilter::All, bool strip_quotes = false);

// ---------------------------------------------------------------------------
// Per-segment series

struct ContentOptions {
    double alpha = 0.01;
    bool strip_quotes = false;
    TextUnit text_unit = TextUnit::User;
};

/// Column-major description of a metric table; NaN marks missing values.
struct ContentTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Columns applicable to a payload kind, in output order.
std::vector<std::string> content_columns(ingest::PayloadKind kind);

/// Content metrics for every segment. For token payloads `corpus` supplies the IDF statistics.
ContentTable compute_content_series(std::span<const ingest::Segment> segments,
                                    std::span<const ingest::SegmentGraph> graphs, ingest::PayloadKind kind,
                                    const DocumentFrequencies& corpus, const ContentOptions& options);

}  // namespace coevo::content
