#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vqd/trace.hpp"

namespace vqd {

using json = nlohmann::json;

enum class EvaluationMode { DirectAnswer, MultipleChoice };

struct EvaluationSetting {
    EvaluationMode mode = EvaluationMode::DirectAnswer;

    bool multiple_choice() const { return mode == EvaluationMode::MultipleChoice; }
};

std::string to_string(EvaluationMode mode);
EvaluationMode parse_mode(const std::string& text);

/// One VQA item. `image_ref` is opaque to this library: it is only ever
/// forwarded to backends.
struct BenchmarkInstance {
    std::string id;
    std::string image_ref;
    std::string question;
    std::vector<std::string> answers;
    std::optional<std::vector<std::string>> choices;
    std::optional<std::string> question_type;
    std::string split;

    /// Index of the ground-truth choice (answers[0] located in choices).
    std::optional<std::size_t> correct_choice() const;
};

enum class Method { EndToEnd, Modular, Successive };

std::string to_string(Method method);
Method parse_method(const std::string& text);

struct Prediction {
    std::string instance_id;
    std::string answer_text;
    Method method = Method::EndToEnd;
    std::string variant;
    std::vector<TraceEvent> trace;
    std::optional<std::string> outcome_class;
    json details = json::object();
};

struct DecodingParams {
    int beam_width = 5;
    double length_penalty = -1.0;
    int max_tokens = 256;
    std::vector<std::string> stop;
};

struct RunConfig {
    Method method = Method::EndToEnd;
    std::string variant = "task-agnostic";
    EvaluationSetting setting;
    std::filesystem::path dataset;
    std::string backends;
    std::optional<std::size_t> sample_size;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> cache_dir;
    DecodingParams decoding;
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::size_t line, const std::string& message);

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Checks the invariants of one record. Returns the first violation, if any.
std::optional<std::string> validate_instance(const BenchmarkInstance& instance,
                                             const EvaluationSetting& setting);

BenchmarkInstance instance_from_json(const json& record);
json instance_to_json(const BenchmarkInstance& instance);

/// Parses line-delimited records; blank lines are skipped but still counted
/// for error positions.
std::vector<BenchmarkInstance> parse_dataset(std::istream& in, const EvaluationSetting& setting);
std::vector<BenchmarkInstance> load_dataset(const std::filesystem::path& path,
                                            const EvaluationSetting& setting);
void write_dataset(std::ostream& out, const std::vector<BenchmarkInstance>& instances);

/// SplitMix64: state += 0x9E3779B97F4A7C15, then the standard mix. Chosen
/// because it is trivially portable to any language.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// Fisher-Yates over index positions, walking i from size-1 down to 1 and
/// swapping with j = next() % (i + 1); the first n shuffled positions are
/// returned in that order.
std::vector<BenchmarkInstance> sample(const std::vector<BenchmarkInstance>& instances,
                                      std::size_t n, std::uint64_t seed);

}  // namespace vqd
