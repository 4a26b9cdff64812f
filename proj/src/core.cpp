#include "vqd/core.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

namespace vqd {

std::string to_string(EvaluationMode mode) {
    return mode == EvaluationMode::MultipleChoice ? "mc" : "direct";
}

EvaluationMode parse_mode(const std::string& text) {
    if (text == "direct" || text == "DirectAnswer") return EvaluationMode::DirectAnswer;
    if (text == "mc" || text == "MultipleChoice") return EvaluationMode::MultipleChoice;
    throw std::invalid_argument("unknown evaluation setting: " + text);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::EndToEnd: return "e2e";
        case Method::Modular: return "viper";
        case Method::Successive: return "successive";
    }
    return "e2e";
}

Method parse_method(const std::string& text) {
    if (text == "e2e") return Method::EndToEnd;
    if (text == "viper") return Method::Modular;
    if (text == "successive") return Method::Successive;
    throw std::invalid_argument("unknown method: " + text);
}

std::optional<std::size_t> BenchmarkInstance::correct_choice() const {
    if (!choices || answers.empty()) return std::nullopt;
    auto it = std::find(choices->begin(), choices->end(), answers.front());
    if (it == choices->end()) return std::nullopt;
    return static_cast<std::size_t>(it - choices->begin());
}

DatasetError::DatasetError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::optional<std::string> validate_instance(const BenchmarkInstance& instance,
                                             const EvaluationSetting& setting) {
    if (instance.id.empty()) return "empty id";
    if (instance.question.empty()) return "empty question";
    if (instance.choices) {
        const auto& c = *instance.choices;
        if (c.size() < 2) return "choices must have at least 2 entries";
        std::set<std::string> seen(c.begin(), c.end());
        if (seen.size() != c.size()) return "choices must be pairwise distinct";
    }
    if (setting.multiple_choice()) {
        if (!instance.choices) return "multiple-choice setting requires choices";
        if (instance.answers.empty()) return "multiple-choice record has no answer";
        if (!instance.correct_choice()) return "answers[0] is not one of the choices";
    } else {
        if (instance.answers.empty()) return "direct-answer setting requires answers";
    }
    if (instance.answers.size() > 10) return "at most 10 answers are allowed";
    return std::nullopt;
}

BenchmarkInstance instance_from_json(const json& record) {
    if (!record.is_object()) throw std::invalid_argument("record is not an object");
    BenchmarkInstance inst;
    inst.id = record.at("id").get<std::string>();
    inst.image_ref = record.at("image_ref").get<std::string>();
    inst.question = record.at("question").get<std::string>();
    if (record.contains("answers")) inst.answers = record.at("answers").get<std::vector<std::string>>();
    if (record.contains("choices") && !record.at("choices").is_null())
        inst.choices = record.at("choices").get<std::vector<std::string>>();
    if (record.contains("question_type") && !record.at("question_type").is_null())
        inst.question_type = record.at("question_type").get<std::string>();
    inst.split = record.value("split", std::string{});
    return inst;
}

json instance_to_json(const BenchmarkInstance& instance) {
    json j = {{"id", instance.id},
              {"image_ref", instance.image_ref},
              {"question", instance.question},
              {"answers", instance.answers}};
    if (instance.choices) j["choices"] = *instance.choices;
    if (instance.question_type) j["question_type"] = *instance.question_type;
    j["split"] = instance.split;
    return j;
}

std::vector<BenchmarkInstance> parse_dataset(std::istream& in, const EvaluationSetting& setting) {
    std::vector<BenchmarkInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        BenchmarkInstance inst;
        try {
            inst = instance_from_json(json::parse(line));
        } catch (const std::exception& e) {
            throw DatasetError(line_no, std::string("malformed record: ") + e.what());
        }
        if (auto problem = validate_instance(inst, setting)) {
            throw DatasetError(line_no, "invalid record '" + inst.id + "': " + *problem);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<BenchmarkInstance> load_dataset(const std::filesystem::path& path,
                                            const EvaluationSetting& setting) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    return parse_dataset(in, setting);
}

void write_dataset(std::ostream& out, const std::vector<BenchmarkInstance>& instances) {
    for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<BenchmarkInstance> sample(const std::vector<BenchmarkInstance>& instances,
                                      std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    if (n > instances.size()) {
        throw std::invalid_argument("sample size " + std::to_string(n) + " exceeds " +
                                    std::to_string(instances.size()) + " instances");
    }
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<BenchmarkInstance> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(instances[order[k]]);
    return out;
}

}  // namespace vqd
