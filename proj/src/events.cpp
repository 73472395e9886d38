#include "coevo/events.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "coevo/error.hpp"
#include "coevo/io/csv.hpp"

namespace coevo::ingest {

using nlohmann::json;

PayloadKind parse_payload_kind(std::string_view name) {
    if (name == "tokens") return PayloadKind::Tokens;
    if (name == "asset") return PayloadKind::Asset;
    if (name == "numeric") return PayloadKind::Numeric;
    throw ConfigError("unknown payload kind '" + std::string(name) + "' (expected tokens|asset|numeric)");
}

std::string_view to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::Tokens: return "tokens";
        case PayloadKind::Asset: return "asset";
        case PayloadKind::Numeric: return "numeric";
    }
    return "?";
}

PayloadKind kind_of(const Payload& payload) {
    return static_cast<PayloadKind>(payload.index());
}

LogFormat parse_log_format(std::string_view name) {
    if (name == "jsonl") return LogFormat::Jsonl;
    if (name == "csv") return LogFormat::Csv;
    throw ConfigError("unknown log format '" + std::string(name) + "' (expected jsonl|csv)");
}

std::string_view to_string(LogFormat format) {
    return format == LogFormat::Jsonl ? "jsonl" : "csv";
}

namespace {

NumericMessage make_numeric(double v, std::size_t line) {
    if (!std::isfinite(v) || v < 1.0 || v > 100.0)
        throw ParseError(line, "numeric message outside [1,100]");
    return NumericMessage{v};
}

// Applies the mass-mailing and self-loop rules. Returns false when the record is dropped.
bool normalize(EventRecord& e, const FormatDescriptor& d, ParseStats& stats) {
    if (e.targets.size() > d.max_targets) {
        ++stats.dropped_mass;
        return false;
    }
    const auto before = e.targets.size();
    std::erase(e.targets, e.actor);
    stats.self_loops_removed += before - e.targets.size();
    return true;
}

EventRecord parse_json_line(const std::string& text, std::size_t line, PayloadKind expected) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ParseError(line, std::string("invalid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");

    EventRecord e;
    try {
        if (!j.contains("ts") || !j["ts"].is_number_integer()) throw ParseError(line, "missing integer field 'ts'");
        e.timestamp = j["ts"].get<std::int64_t>();
        if (!j.contains("actor") || !j["actor"].is_string()) throw ParseError(line, "missing string field 'actor'");
        e.actor = j["actor"].get<std::string>();
        if (j.contains("targets")) {
            if (!j["targets"].is_array()) throw ParseError(line, "'targets' must be an array");
            for (const auto& t : j["targets"]) {
                if (!t.is_string()) throw ParseError(line, "'targets' entries must be strings");
                e.targets.push_back(t.get<std::string>());
            }
        }
        if (!j.contains("doc") || !j["doc"].is_string()) throw ParseError(line, "missing string field 'doc'");
        e.doc_id = j["doc"].get<std::string>();
        if (j.contains("group")) {
            if (!j["group"].is_string()) throw ParseError(line, "'group' must be a string");
            e.group = j["group"].get<std::string>();
        }
    } catch (const json::exception& ex) {
        throw ParseError(line, ex.what());
    }
    if (e.actor.empty()) throw ParseError(line, "empty actor");

    const int present = int(j.contains("tokens")) + int(j.contains("asset")) + int(j.contains("value"));
    if (present != 1) throw ParseError(line, "exactly one of tokens, asset, value is required");

    if (j.contains("tokens")) {
        if (expected != PayloadKind::Tokens) throw ParseError(line, "payload 'tokens' does not match configured kind");
        TokenList tl;
        if (!j["tokens"].is_array()) throw ParseError(line, "'tokens' must be an array");
        for (const auto& t : j["tokens"]) {
            if (!t.is_string()) throw ParseError(line, "'tokens' entries must be strings");
            tl.tokens.push_back(t.get<std::string>());
        }
        e.payload = std::move(tl);
    } else if (j.contains("asset")) {
        if (expected != PayloadKind::Asset) throw ParseError(line, "payload 'asset' does not match configured kind");
        if (!j["asset"].is_string()) throw ParseError(line, "'asset' must be a string");
        e.payload = AssetId{j["asset"].get<std::string>()};
    } else {
        if (expected != PayloadKind::Numeric) throw ParseError(line, "payload 'value' does not match configured kind");
        if (!j["value"].is_number()) throw ParseError(line, "'value' must be a number");
        e.payload = make_numeric(j["value"].get<double>(), line);
    }
    return e;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

EventRecord parse_csv_fields(const std::vector<std::string>& f, std::size_t line, PayloadKind kind, bool has_group) {
    const std::size_t expected = has_group ? 6 : 5;
    if (f.size() != expected)
        throw ParseError(line, "expected " + std::to_string(expected) + " fields, got " + std::to_string(f.size()));
    EventRecord e;
    try {
        std::size_t used = 0;
        e.timestamp = std::stoll(f[0], &used);
        if (used != f[0].size()) throw std::invalid_argument("ts");
    } catch (const std::exception&) {
        throw ParseError(line, "invalid integer ts '" + f[0] + "'");
    }
    e.actor = f[1];
    if (e.actor.empty()) throw ParseError(line, "empty actor");
    for (auto& t : split(f[2], ';')) {
        if (t.empty()) throw ParseError(line, "empty target in list");
        e.targets.push_back(std::move(t));
    }
    e.doc_id = f[3];
    switch (kind) {
        case PayloadKind::Tokens: e.payload = TokenList{split(f[4], '\n')}; break;
        case PayloadKind::Asset:
            if (f[4].empty()) throw ParseError(line, "empty asset id");
            e.payload = AssetId{f[4]};
            break;
        case PayloadKind::Numeric: {
            double v = 0.0;
            try {
                v = io::parse_real(f[4]);
            } catch (const std::exception&) {
                throw ParseError(line, "invalid numeric payload '" + f[4] + "'");
            }
            e.payload = make_numeric(v, line);
            break;
        }
    }
    if (has_group && !f[5].empty()) e.group = f[5];
    return e;
}

}  // namespace

ParseResult parse_events(std::istream& in, const FormatDescriptor& d) {
    ParseResult result;
    auto& stats = result.stats;

    if (d.format == LogFormat::Jsonl) {
        std::string text;
        std::size_t line = 0;
        while (std::getline(in, text)) {
            ++line;
            if (!text.empty() && text.back() == '\r') text.pop_back();
            if (text.find_first_not_of(" \t") == std::string::npos) continue;
            auto e = parse_json_line(text, line, d.payload);
            if (normalize(e, d, stats)) result.events.push_back(std::move(e));
        }
        stats.lines = line;
    } else {
        std::vector<std::string> fields;
        std::size_t line = 0;
        try {
            if (!io::read_csv_record(in, fields, line)) throw ParseError(1, "missing CSV header");
        } catch (const std::runtime_error& ex) {
            if (dynamic_cast<const ParseError*>(&ex)) throw;
            throw ParseError(line, ex.what());
        }
        const std::vector<std::string> base{"ts", "actor", "targets", "doc", "payload"};
        bool has_group = false;
        if (fields == base) {
            has_group = false;
        } else if (fields.size() == 6 && std::equal(base.begin(), base.end(), fields.begin()) && fields[5] == "group") {
            has_group = true;
        } else {
            throw ParseError(1, "CSV header must be ts,actor,targets,doc,payload[,group]");
        }
        while (true) {
            const std::size_t start = line + 1;
            try {
                if (!io::read_csv_record(in, fields, line)) break;
            } catch (const std::runtime_error&) {
                throw ParseError(start, "unterminated quoted field");
            }
            if (fields.size() == 1 && fields[0].empty()) continue;
            auto e = parse_csv_fields(fields, start, d.payload, has_group);
            if (normalize(e, d, stats)) result.events.push_back(std::move(e));
        }
        stats.lines = line;
    }

    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
    return result;
}

std::string to_jsonl(const EventRecord& e) {
    json j;
    j["ts"] = e.timestamp;
    j["actor"] = e.actor;
    j["targets"] = e.targets;
    j["doc"] = e.doc_id;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TokenList>) {
                j["tokens"] = p.tokens;
            } else if constexpr (std::is_same_v<T, AssetId>) {
                j["asset"] = p.id;
            } else {
                if (p.value == std::floor(p.value))
                    j["value"] = static_cast<std::int64_t>(p.value);
                else
                    j["value"] = p.value;
            }
        },
        e.payload);
    if (e.group) j["group"] = *e.group;
    return j.dump();
}

void serialize_events(std::ostream& out, const std::vector<EventRecord>& events, LogFormat format) {
    if (format == LogFormat::Jsonl) {
        for (const auto& e : events) out << to_jsonl(e) << '\n';
        return;
    }
    const bool has_group = std::any_of(events.begin(), events.end(), [](const auto& e) { return e.group.has_value(); });
    std::vector<std::string> header{"ts", "actor", "targets", "doc", "payload"};
    if (has_group) header.push_back("group");
    io::write_csv_row(out, header);
    for (const auto& e : events) {
        std::string targets;
        for (std::size_t i = 0; i < e.targets.size(); ++i) {
            if (i) targets.push_back(';');
            targets += e.targets[i];
        }
        std::string payload = std::visit(
            [](const auto& p) -> std::string {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, TokenList>) {
                    std::string s;
                    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
                        if (i) s.push_back('\n');
                        s += p.tokens[i];
                    }
                    return s;
                } else if constexpr (std::is_same_v<T, AssetId>) {
                    return p.id;
                } else {
                    return io::format_real(p.value);
                }
            },
            e.payload);
        std::vector<std::string> row{std::to_string(e.timestamp), e.actor, targets, e.doc_id, payload};
        if (has_group) row.push_back(e.group.value_or(""));
        io::write_csv_row(out, row);
    }
}

}  // namespace coevo::ingest
