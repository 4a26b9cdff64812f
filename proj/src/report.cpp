#include "vqd/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vqd {

namespace {

json decoding_json(const DecodingParams& d) {
    return {{"beam_width", d.beam_width}, {"length_penalty", d.length_penalty}, {"max_tokens", d.max_tokens}, {"stop", d.stop}};
}

json config_json(const EvaluationPlan& plan) {
    const auto& c = plan.config;
    json j = {{"method", to_string(c.method)},
              {"setting", c.setting.multiple_choice() ? "mc" : "direct"},
              {"dataset", c.dataset.string()},
              {"backends", c.backends},
              {"sample_size", c.sample_size ? json(*c.sample_size) : json(nullptr)},
              {"seed", c.seed},
              {"decoding", decoding_json(c.decoding)},
              {"judge", plan.judge}};
    if (c.method == Method::Modular) {
        j["variant"] = program::to_string(plan.modular.variant);
        j["step_budget"] = plan.modular.step_budget;
        j["verify_threshold"] = plan.modular.verify_threshold;
        j["demos"] = plan.demos_source ? json(*plan.demos_source) : json(nullptr);
    } else {
        j["variant"] = to_string(c.method);
    }
    if (c.method == Method::Successive) j["max_steps"] = plan.successive.max_steps;
    return j;
}

json prediction_json(const InstanceRecord& r) {
    json trace = json::array();
    for (const auto& e : r.prediction.trace) trace.push_back(to_json(e));
    json j = {{"instance_id", r.instance.id},
              {"question", r.instance.question},
              {"question_type", r.instance.question_type ? json(*r.instance.question_type) : json(nullptr)},
              {"answer_text", r.prediction.answer_text},
              {"method", to_string(r.prediction.method)},
              {"variant", r.prediction.variant},
              {"outcome_class", r.prediction.outcome_class ? json(*r.prediction.outcome_class) : json(nullptr)},
              {"details", r.prediction.details},
              {"scores", r.scores},
              {"trace", std::move(trace)}};
    return j;
}

const char* primary_metric(const json& report) {
    return report.at("config").at("setting") == "mc" ? "mc_accuracy" : "vqa_accuracy";
}

json metric_means(const json& predictions) {
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& p : predictions) {
        for (const auto& [name, value] : p.at("scores").items()) {
            double v;
            if (value.is_number()) v = value.get<double>();
            else if (value.is_object() && value.contains("verdict")) v = value["verdict"] == "Correct" ? 1.0 : 0.0;
            else continue;
            auto& [sum, n] = sums[name];
            sum += v;
            ++n;
        }
    }
    json m = {{"count", predictions.size()}};
    for (const auto& [name, sn] : sums) m[name] = sn.first / static_cast<double>(sn.second);
    return m;
}

json error_table_json(const ErrorTable& t) {
    return {{"total", t.total},
            {"counts", {{"NoException", t.counts[0]}, {"Parsing", t.counts[1]}, {"Runtime", t.counts[2]}}},
            {"percent", {{"NoException", t.percent[0]}, {"Parsing", t.percent[1]}, {"Runtime", t.percent[2]}}}};
}

json breakdown_json(const RuntimeBreakdown& b) {
    json counts = json::object(), percent = json::object();
    for (std::size_t i = 0; i < program::kErrorLabels.size(); ++i) {
        const auto name = program::to_string(program::kErrorLabels[i]);
        counts[name] = b.counts[i];
        percent[name] = b.percent[i];
    }
    return {{"total", b.total}, {"counts", counts}, {"percent", percent}};
}

json errors_json(const std::vector<OutcomeRecord>& outcomes) {
    if (outcomes.empty()) return nullptr;
    json j = json::object();
    for (auto view : {IndentationView::AsParsing, IndentationView::AsRuntime})
        j[to_string(view)] = {{"summary", error_table_json(error_table(outcomes, view))},
                              {"breakdown", breakdown_json(runtime_breakdown(outcomes, view))}};
    return j;
}

std::vector<TypedScore> typed_scores(const json& predictions, const std::string& metric) {
    std::vector<TypedScore> out;
    for (const auto& p : predictions) {
        if (!p.at("question_type").is_string()) continue;
        const auto& v = p.at("scores").value(metric, json(nullptr));
        if (!v.is_number()) continue;
        out.push_back({p["question_type"].get<std::string>(), v.get<double>()});
    }
    return out;
}

json by_type_json(const json& predictions, const std::string& metric) {
    json rows = json::array();
    for (const auto& r : breakdown_by_type(typed_scores(predictions, metric)))
        rows.push_back({{"question_type", r.question_type},
                        {"count", r.count},
                        {"failures", r.failures},
                        {"failure_rate", r.failure_rate}});
    return rows;
}

void strip_ts(json& j) {
    if (j.is_object()) {
        j.erase("ts");
        for (auto& [k, v] : j.items()) strip_ts(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_ts(v);
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string number_text(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

json build_report(const EvaluationPlan& plan, const EvaluationRun& run) {
    json report;
    report["format"] = kReportFormat;
    report["notes"] = {
        "vqa_accuracy is min(1, matches / 3) over the annotations, after answer normalization",
        "exact_match compares against the first annotation, after answer normalization",
        "error summary and breakdown are given twice: with IndentationError counted as a parsing failure, and as "
        "its own runtime label",
        "percentages are stored at full precision; rendered tables round to integers"};
    report["config"] = config_json(plan);

    json predictions = json::array();
    for (const auto& r : run.records) predictions.push_back(prediction_json(r));
    report["metrics"] = metric_means(predictions);
    report["predictions"] = std::move(predictions);

    const auto outcomes = outcome_records(report);
    report["errors"] = errors_json(outcomes);
    report["by_type"] = by_type_json(report["predictions"], primary_metric(report));

    report["run"] = {{"backend_calls", run.stats.backend_calls},
                     {"cache_hits", run.stats.cache_hits},
                     {"cache_misses", run.stats.cache_misses},
                     {"cache_corrupt", run.stats.cache_corrupt},
                     {"cache_dir", plan.config.cache_dir ? json(plan.config.cache_dir->string()) : json(nullptr)},
                     {"jobs", plan.jobs},
                     {"seconds", run.stats.seconds},
                     {"finished_at", now_micros()}};
    return report;
}

json canonicalize(json report) {
    report.erase("run");
    strip_ts(report);
    return report;
}

std::vector<OutcomeRecord> outcome_records(const json& report) {
    std::vector<OutcomeRecord> out;
    for (const auto& p : report.at("predictions")) {
        const auto& d = p.at("details");
        if (!d.contains("status")) continue;
        OutcomeRecord r;
        r.status = program::parse_execution_status(d["status"].get<std::string>());
        if (d.contains("error_label")) r.error_label = program::parse_error_label(d["error_label"].get<std::string>());
        if (d.contains("parse_label")) r.parse_label = program::parse_parse_label(d["parse_label"].get<std::string>());
        out.push_back(r);
    }
    return out;
}

std::string scores_csv(const json& report) {
    const bool mc = report.at("config").at("setting") == "mc";
    const bool judge = report.at("config").value("judge", false);
    std::ostringstream os;
    os << "id,question_type,answer,outcome_class";
    if (mc) os << ",mc_accuracy";
    else os << ",vqa_accuracy,exact_match" << (judge ? ",judge" : "");
    os << "\n";
    for (const auto& p : report.at("predictions")) {
        const auto& s = p.at("scores");
        os << csv_field(p["instance_id"].get<std::string>()) << ','
           << (p["question_type"].is_string() ? csv_field(p["question_type"].get<std::string>()) : "") << ','
           << csv_field(p["answer_text"].get<std::string>()) << ','
           << (p["outcome_class"].is_string() ? p["outcome_class"].get<std::string>() : "");
        auto num = [&](const char* key) {
            const auto& v = s.value(key, json(nullptr));
            os << ',' << (v.is_number() ? number_text(v.get<double>()) : "");
        };
        if (mc) {
            num("mc_accuracy");
        } else {
            num("vqa_accuracy");
            num("exact_match");
            if (judge) os << ',' << (s.contains("judge") ? s["judge"]["verdict"].get<std::string>() : "");
        }
        os << "\n";
    }
    return os.str();
}

json read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path.string());
    json j = json::parse(in);
    if (j.value("format", "") != kReportFormat) throw std::runtime_error(path.string() + " is not a run report");
    return j;
}

namespace {

std::string label_cell(const std::string& name) {
    std::string s = name;
    if (s.size() < 22) s.append(22 - s.size(), ' ');
    return s;
}

std::string render_scores(const json& report) {
    std::ostringstream os;
    const auto& c = report.at("config");
    os << "method " << c.at("method").get<std::string>() << ", variant " << c.at("variant").get<std::string>()
       << ", setting " << c.at("setting").get<std::string>() << "\n";
    for (const auto& [name, value] : report.at("metrics").items()) {
        if (name == "count")
            os << label_cell("instances") << value.get<std::size_t>() << "\n";
        else
            os << label_cell(name) << std::fixed << std::setprecision(2) << 100.0 * value.get<double>() << "\n";
    }
    return os.str();
}

ErrorTable table_from(const json& j) {
    ErrorTable t;
    t.total = j.at("total").get<std::size_t>();
    const char* names[] = {"NoException", "Parsing", "Runtime"};
    for (std::size_t i = 0; i < 3; ++i) {
        t.counts[i] = j.at("counts").at(names[i]).get<std::size_t>();
        t.percent[i] = j.at("percent").at(names[i]).get<double>();
    }
    return t;
}

RuntimeBreakdown breakdown_from(const json& j) {
    RuntimeBreakdown b;
    b.total = j.at("total").get<std::size_t>();
    for (std::size_t i = 0; i < program::kErrorLabels.size(); ++i) {
        const auto name = program::to_string(program::kErrorLabels[i]);
        b.counts[i] = j.at("counts").at(name).get<std::size_t>();
        b.percent[i] = j.at("percent").at(name).get<double>();
    }
    return b;
}

std::string render_errors(const json& report) {
    const auto& errors = report.at("errors");
    if (errors.is_null()) return "no program outcomes in this report\n";
    const std::string column = report.at("config").at("dataset").get<std::string>().empty()
                                   ? "run"
                                   : std::filesystem::path(report["config"]["dataset"].get<std::string>()).stem().string();
    std::ostringstream os;
    for (auto view : {IndentationView::AsParsing, IndentationView::AsRuntime}) {
        const auto& v = errors.at(to_string(view));
        os << "[" << to_string(view) << "] exception modes\n"
           << render_error_table({column}, {table_from(v.at("summary"))});
        const auto b = breakdown_from(v.at("breakdown"));
        os << "[" << to_string(view) << "] runtime exceptions";
        if (b.total == 0) {
            os << ": none\n";
        } else {
            os << "\n" << render_runtime_breakdown({column}, {b});
        }
    }
    return os.str();
}

std::string render_types(const json& report) {
    const auto& rows = report.at("by_type");
    if (rows.empty()) return "no question type has enough samples\n";
    std::ostringstream os;
    for (const auto& r : rows)
        os << label_cell(r.at("question_type").get<std::string>()) << std::lround(r.at("failure_rate").get<double>())
           << "% failed of " << r.at("count").get<std::size_t>() << "\n";
    return os.str();
}

}  // namespace

std::string render_report(const json& report, const std::string& view) {
    if (view == "scores") return render_scores(report);
    if (view == "errors") return render_errors(report);
    if (view == "types") return render_types(report);
    if (view == "all") return render_scores(report) + "\n" + render_errors(report) + "\n" + render_types(report);
    throw std::invalid_argument("unknown view '" + view + "' (scores, errors, types, all)");
}

}  // namespace vqd
