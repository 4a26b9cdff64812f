#include "vqd/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "vqd/assets.hpp"
#include "vqd/report.hpp"
#include "vqd/runner.hpp"

namespace vqd {

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunFlags {
    std::string method = "e2e";
    std::string variant = "task-agnostic";
    std::string setting = "direct";
    std::string dataset;
    std::string backends;
    std::string cache;
    std::uint64_t seed = 0;
    std::size_t limit = 0;
    std::size_t jobs = 1;
    std::string out = "report.json";
    std::string demos;
    bool judge = false;
    std::size_t max_steps = 8;
    std::size_t step_budget = 100000;
    double threshold = 0.5;
};

EvaluationPlan make_plan(const RunFlags& f) {
    EvaluationPlan plan;
    auto& c = plan.config;
    try {
        c.method = parse_method(f.method);
        c.setting.mode = parse_mode(f.setting);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.dataset = f.dataset;
    c.backends = f.backends;
    c.seed = f.seed;
    if (f.limit > 0) c.sample_size = f.limit;
    if (!f.cache.empty()) c.cache_dir = f.cache;
    plan.jobs = f.jobs;
    plan.judge = f.judge;
    if (f.judge && c.setting.multiple_choice()) throw ConfigError("--judge applies to the direct setting only");

    if (c.method == Method::Modular) {
        try {
            plan.modular.variant = program::parse_prompt_variant(f.variant);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        c.variant = f.variant;
        plan.modular.step_budget = f.step_budget;
        plan.modular.verify_threshold = f.threshold;
        const bool few_shot = plan.modular.variant == program::PromptVariant::OnlyBlip2FewShot;
        if (few_shot) {
            if (f.demos.empty()) throw ConfigError("variant only-blip2-fs needs --demos with 3 demonstrations");
            try {
                plan.modular.demos = program::parse_code_demonstrations(load_text(f.demos));
            } catch (const std::exception& e) {
                throw ConfigError("--demos " + f.demos + ": " + e.what());
            }
            if (plan.modular.demos.size() != 3)
                throw ConfigError("variant only-blip2-fs needs 3 demonstrations, " + f.demos + " has " +
                                  std::to_string(plan.modular.demos.size()));
            plan.demos_source = f.demos;
        } else if (!f.demos.empty()) {
            throw ConfigError("--demos is only used by variant only-blip2-fs");
        }
    } else if (f.variant != "task-agnostic") {
        throw ConfigError("--variant applies to --method viper only");
    }

    if (c.method == Method::Successive) {
        if (f.max_steps < 1) throw ConfigError("--max-steps must be at least 1");
        plan.successive.max_steps = f.max_steps;
        if (!f.demos.empty()) {
            try {
                plan.successive.demonstrations = parse_transcript_demonstrations(load_text(f.demos));
            } catch (const std::exception& e) {
                throw ConfigError("--demos " + f.demos + ": " + e.what());
            }
            if (plan.successive.demonstrations.size() != 3)
                throw ConfigError("successive prompting needs 3 demonstrations");
            plan.demos_source = f.demos;
        }
    }
    return plan;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream o(path, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + path.string());
    o << text;
    if (!o) throw std::runtime_error("write failed for " + path.string());
}

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
    EvaluationPlan plan;
    try {
        plan = make_plan(flags);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<BenchmarkInstance> instances;
    try {
        instances = select_instances(load_dataset(plan.config.dataset, plan.config.setting), plan.config.sample_size,
                                     plan.config.seed);
    } catch (const std::exception& e) {
        err << "dataset error: " << e.what() << "\n";
        return kExitData;
    }

    BackendSuite backends;
    try {
        backends = open_backends(plan.config.backends);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    EvaluationRun run;
    try {
        run = evaluate(plan, instances, backends);
    } catch (const std::invalid_argument& e) {
        err << "dataset error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "backend error: " << e.what() << "\n";
        return kExitBackend;
    }

    const json report = build_report(plan, run);
    std::filesystem::path path = flags.out;
    auto csv_path = path;
    csv_path.replace_extension(".csv");
    try {
        write_file(path, report.dump(2) + "\n");
        write_file(csv_path, scores_csv(report));
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }
    out << render_report(report, "scores");
    out << "backend calls " << run.stats.backend_calls << ", cache hits " << run.stats.cache_hits << "\n";
    out << "wrote " << path.string() << " and " << csv_path.string() << "\n";
    return kExitOk;
}

int cmd_report(const std::string& path, const std::string& view, bool csv, std::ostream& out, std::ostream& err) {
    try {
        const json report = read_report(path);
        out << (csv ? scores_csv(report) : render_report(report, view));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "report error: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_validate(const std::string& path, const std::string& setting_name, std::ostream& out, std::ostream& err) {
    EvaluationSetting setting;
    try {
        setting.mode = parse_mode(setting_name);
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::ifstream in(path);
    if (!in) {
        err << "cannot open " << path << "\n";
        return kExitData;
    }
    std::size_t line_no = 0, records = 0, violations = 0;
    std::map<std::string, std::size_t> first_seen;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++records;
        try {
            const auto inst = instance_from_json(json::parse(line));
            if (auto problem = validate_instance(inst, setting)) {
                out << path << ":" << line_no << ": error: " << *problem << "\n";
                ++violations;
            }
            auto [it, fresh] = first_seen.emplace(inst.id, line_no);
            if (!fresh)
                out << path << ":" << line_no << ": warning: duplicate id '" << inst.id << "' (first on line "
                    << it->second << ")\n";
        } catch (const std::exception& e) {
            out << path << ":" << line_no << ": error: " << e.what() << "\n";
            ++violations;
        }
    }
    out << records << " records, " << violations << " violations\n";
    return violations == 0 ? kExitOk : kExitData;
}

/// Inlines `run --config FILE` as flags; flags given on the command line win.
/// Keys may sit at the top level or under a [run] table.
std::vector<std::string> expand_run_config(std::vector<std::string> args) {
    if (args.empty() || args.front() != "run") return args;
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return args;
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.starts_with("--")) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    std::vector<std::string> extra;
    for (const auto& item : CLI::ConfigTOML().from_file(*path)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && item.parents != std::vector<std::string>{"run"})
            throw ConfigError("unexpected section in " + *path + ": " + item.parents.front());
        if (given.count(item.name)) continue;
        if (item.inputs.size() != 1) throw ConfigError("key '" + item.name + "' in " + *path + " needs one value");
        extra.push_back("--" + item.name + "=" + item.inputs.front());
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Visual question answering evaluation harness"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Evaluate one method over a dataset and write a report");
    run->add_option("--method", rf.method, "e2e | viper | successive")->check(CLI::IsMember({"e2e", "viper", "successive"}));
    run->add_option("--variant", rf.variant, "task-agnostic | no-blip2 | only-blip2-zs | only-blip2-fs");
    run->add_option("--setting", rf.setting, "direct | mc")->check(CLI::IsMember({"direct", "mc"}));
    run->add_option("--dataset", rf.dataset, "Line-delimited dataset file")->required();
    run->add_option("--backends", rf.backends, "mock:PATH or remote:URL")->required();
    run->add_option("--cache", rf.cache, "Response cache directory");
    run->add_option("--seed", rf.seed, "Sampling seed");
    run->add_option("--limit", rf.limit, "Evaluate a seeded sample of N instances");
    run->add_option("--jobs", rf.jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out", rf.out, "Report path; the CSV goes next to it");
    run->add_option("--demos", rf.demos, "Demonstration file or shipped asset name");
    run->add_flag("--judge", rf.judge, "Also score direct answers with the instruct LM judge");
    run->add_option("--max-steps", rf.max_steps, "Follow-up cap for successive prompting");
    run->add_option("--step-budget", rf.step_budget, "Interpreter step budget")->check(CLI::PositiveNumber);
    run->add_option("--threshold", rf.threshold, "verify_property threshold");
    std::string config_file;
    run->add_option("--config", config_file, "TOML or INI file with the same keys as the flags");

    std::string report_path, view = "all";
    bool csv = false;
    auto* report = app.add_subcommand("report", "Render tables from a run report");
    report->add_option("report", report_path, "Report JSON")->required();
    report->add_option("--view", view, "scores | errors | types | all")
        ->check(CLI::IsMember({"scores", "errors", "types", "all"}));
    report->add_flag("--csv", csv, "Print the per-instance CSV instead");

    std::string validate_path, validate_setting = "direct";
    auto* validate = app.add_subcommand("validate", "Check a dataset file");
    validate->add_option("dataset", validate_path, "Line-delimited dataset file")->required();
    validate->add_option("--setting", validate_setting, "direct | mc")->check(CLI::IsMember({"direct", "mc"}));

    std::vector<std::string> reversed;
    try {
        const auto expanded = expand_run_config(args);
        reversed.assign(expanded.rbegin(), expanded.rend());
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << "\n";
        if (dynamic_cast<const CLI::FileError*>(&e) || dynamic_cast<const CLI::ConfigError*>(&e))
            return kExitConfig;
        return kExitUsage;
    }

    if (*run) return cmd_run(rf, out, err);
    if (*report) return cmd_report(report_path, view, csv, out, err);
    return cmd_validate(validate_path, validate_setting, out, err);
}

}  // namespace vqd
