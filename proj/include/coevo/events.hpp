#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace coevo::ingest {

enum class PayloadKind { Tokens, Asset, Numeric };

PayloadKind parse_payload_kind(std::string_view name);  // throws ConfigError
std::string_view to_string(PayloadKind kind);

/// Raw text fragments of a document. Tokenization happens in contentmetrics so the
/// stored payload round-trips unchanged.
struct TokenList {
    std::vector<std::string> tokens;
    bool operator==(const TokenList&) const = default;
};

struct AssetId {
    std::string id;
    bool operator==(const AssetId&) const = default;
};

/// Message value in [1, 100].
struct NumericMessage {
    double value = 0.0;
    bool operator==(const NumericMessage&) const = default;
};

using Payload = std::variant<TokenList, AssetId, NumericMessage>;

PayloadKind kind_of(const Payload& payload);

struct EventRecord {
    std::int64_t timestamp = 0;  ///< milliseconds (simulator: ticks)
    std::string actor;
    std::vector<std::string> targets;  ///< empty for broadcast events
    std::string doc_id;
    Payload payload;
    std::optional<std::string> group;

    bool operator==(const EventRecord&) const = default;
};

enum class LogFormat { Jsonl, Csv };

LogFormat parse_log_format(std::string_view name);  // throws ConfigError
std::string_view to_string(LogFormat format);

struct FormatDescriptor {
    LogFormat format = LogFormat::Jsonl;
    PayloadKind payload = PayloadKind::Tokens;
    std::size_t max_targets = 20;  ///< events addressed to more recipients are mass mailings
};

struct ParseStats {
    std::size_t lines = 0;
    std::size_t dropped_mass = 0;
    std::size_t self_loops_removed = 0;
};

struct ParseResult {
    std::vector<EventRecord> events;
    ParseStats stats;
};

/// Parses a JSONL or CSV event log. Records are returned stably sorted by timestamp.
/// Throws ParseError (with line number) on malformed records.
ParseResult parse_events(std::istream& in, const FormatDescriptor& descriptor);

/// Writes events in the given format; the output is valid input to parse_events.
void serialize_events(std::ostream& out, const std::vector<EventRecord>& events, LogFormat format);

/// One JSONL line without the trailing newline.
std::string to_jsonl(const EventRecord& event);

}  // namespace coevo::ingest
