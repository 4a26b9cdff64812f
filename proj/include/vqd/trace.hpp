#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vqd {

enum class TraceKind { BackendCall, ParserEvent, InterpreterStep, EngineDecision };

std::string to_string(TraceKind kind);
TraceKind parse_trace_kind(const std::string& text);

struct TraceEvent {
    std::uint64_t seq = 0;
    TraceKind kind = TraceKind::BackendCall;
    nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json to_json(const TraceEvent& event);
TraceEvent trace_event_from_json(const nlohmann::json& j);

/// Append-only event log for a single instance. Not thread-safe: every
/// evaluation worker owns its own Trace.
class Trace {
public:
    const TraceEvent& append(TraceKind kind, nlohmann::json payload);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::vector<TraceEvent> take() { return std::move(events_); }
    std::size_t size() const { return events_.size(); }

private:
    std::vector<TraceEvent> events_;
    std::uint64_t next_seq_ = 1;
};

/// Microseconds since the Unix epoch; trace payloads store it under "ts".
std::int64_t now_micros();

}  // namespace vqd
