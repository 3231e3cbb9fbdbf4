// Command-line front end; talks to the library through the C API only.

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "lrxfl/lrxfl.h"

namespace {

struct ConfigDeleter {
    void operator()(lrxfl_config* config) const { lrxfl_config_free(config); }
};
using ConfigHandle = std::unique_ptr<lrxfl_config, ConfigDeleter>;

struct StringDeleter {
    void operator()(char* text) const { lrxfl_string_free(text); }
};
using StringHandle = std::unique_ptr<char, StringDeleter>;

int report_failure(const char* action) {
    std::fprintf(stderr, "error: %s: %s\n", action, lrxfl_last_error());
    return 1;
}

// Every config key reachable from the schema, overridable as --<key> value.
const std::vector<std::string> kOverridableKeys = {
    "dataset.name",          "dataset.samples",
    "dataset.seed",          "dataset.flip_noise",
    "dataset.concepts",      "dataset.class_specs",
    "dataset.csv",           "dataset.label_column",
    "dataset.thresholds",    "dataset.default_threshold",
    "federation.clients",    "federation.rounds",
    "federation.target",     "federation.client_epochs",
    "rules.d_threshold",     "rules.e_threshold",
    "rules.theta",           "rules.beam_width",
    "rules.tau",             "rules.forced_connector",
    "rules.ddt_depth",       "model.temperature",
    "model.entropy_coeff",   "model.learning_rate",
    "model.epochs",          "noise.t",
    "noise.s",               "noise.seed",
    "method",                "output_dir",
};

void add_override_flags(CLI::App* cmd,
                        std::vector<std::pair<std::string, std::string>>* out) {
    for (const std::string& key : kOverridableKeys) {
        cmd->add_option_function<std::string>(
               "--" + key,
               [out, key](const std::string& value) {
                   out->emplace_back(key, value);
               },
               "Override config field " + key)
            ->type_name("VALUE");
    }
}

ConfigHandle load_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    lrxfl_config* raw = nullptr;
    if (lrxfl_config_load(path.c_str(), &raw) != LRXFL_OK) {
        return nullptr;
    }
    ConfigHandle config(raw);
    for (const auto& [key, value] : overrides) {
        if (lrxfl_config_override(config.get(), key.c_str(), value.c_str()) !=
            LRXFL_OK) {
            return nullptr;
        }
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LR-XFL: logic-rule driven explainable federated learning"};
    app.require_subcommand(1);

    std::string config_path;
    int workers = 1;
    std::vector<std::pair<std::string, std::string>> overrides;

    CLI::App* run_cmd =
        app.add_subcommand("run", "Run one experiment from a config file");
    run_cmd->add_option("--config", config_path, "Config file (JSON)")
        ->required();
    run_cmd->add_option("--workers", workers,
                        "Worker threads for client rounds");
    add_override_flags(run_cmd, &overrides);

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep-noise", "Run the configured methods across noise levels");
    sweep_cmd->add_option("--config", config_path, "Config file (JSON)")
        ->required();
    sweep_cmd->add_option("--workers", workers,
                          "Worker threads for client rounds");
    std::vector<double> levels;
    sweep_cmd->add_option("--levels", levels,
                          "Noise levels (default: 0 0.2 0.4 0.6 0.8)");
    add_override_flags(sweep_cmd, &overrides);

    CLI::App* inspect_cmd = app.add_subcommand(
        "inspect-rules", "Print the rule report of a results.json");
    std::string results_path;
    std::string class_filter;
    inspect_cmd->add_option("--results", results_path, "Path to results.json")
        ->required();
    inspect_cmd
        ->add_option("--class", class_filter,
                     "Only print rules for this class")
        ->type_name("NAME");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        ConfigHandle config = load_config(config_path, overrides);
        if (!config) return report_failure("loading config");
        char* results = nullptr;
        if (lrxfl_run(config.get(), workers, &results) != LRXFL_OK) {
            return report_failure("run");
        }
        StringHandle results_guard(results);
        std::fputs(results, stdout);
        return 0;
    }

    if (sweep_cmd->parsed()) {
        ConfigHandle config = load_config(config_path, overrides);
        if (!config) return report_failure("loading config");
        char* summary = nullptr;
        const double* level_ptr = levels.empty() ? nullptr : levels.data();
        if (lrxfl_sweep_noise(config.get(), level_ptr, levels.size(), workers,
                              &summary) != LRXFL_OK) {
            return report_failure("sweep-noise");
        }
        StringHandle summary_guard(summary);
        std::fputs(summary, stdout);
        return 0;
    }

    char* report = nullptr;
    if (lrxfl_inspect_rules(results_path.c_str(), class_filter.c_str(),
                            &report) != LRXFL_OK) {
        return report_failure("inspect-rules");
    }
    StringHandle report_guard(report);
    std::fputs(report, stdout);
    return 0;
}
