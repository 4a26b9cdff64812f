#include "vqd/trace.hpp"

#include <chrono>
#include <stdexcept>

namespace vqd {

std::string to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::BackendCall: return "BackendCall";
        case TraceKind::ParserEvent: return "ParserEvent";
        case TraceKind::InterpreterStep: return "InterpreterStep";
        case TraceKind::EngineDecision: return "EngineDecision";
    }
    return "BackendCall";
}

TraceKind parse_trace_kind(const std::string& text) {
    if (text == "BackendCall") return TraceKind::BackendCall;
    if (text == "ParserEvent") return TraceKind::ParserEvent;
    if (text == "InterpreterStep") return TraceKind::InterpreterStep;
    if (text == "EngineDecision") return TraceKind::EngineDecision;
    throw std::invalid_argument("unknown trace kind: " + text);
}

nlohmann::json to_json(const TraceEvent& event) {
    return {{"seq", event.seq}, {"kind", to_string(event.kind)}, {"payload", event.payload}};
}

TraceEvent trace_event_from_json(const nlohmann::json& j) {
    TraceEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.kind = parse_trace_kind(j.at("kind").get<std::string>());
    e.payload = j.value("payload", nlohmann::json::object());
    return e;
}

const TraceEvent& Trace::append(TraceKind kind, nlohmann::json payload) {
    events_.push_back(TraceEvent{next_seq_++, kind, std::move(payload)});
    return events_.back();
}

std::int64_t now_micros() {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace vqd
