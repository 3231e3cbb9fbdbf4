#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "datasets.hpp"
#include "federation.hpp"

namespace lrxfl::runner {

struct DatasetConfig {
    std::string name;  // parity | conjunctive | csv
    int samples = 2000;
    uint64_t seed = 7;
    double flip_noise = 0.0;
    std::vector<std::string> concepts;
    std::vector<std::pair<std::string, std::vector<std::string>>> class_specs;
    std::string csv_path;
    std::string label_column = "label";
    std::map<std::string, double> thresholds;
    double default_threshold = 0.5;
};

/// Parsed, defaulted and validated experiment configuration.
struct Config {
    DatasetConfig dataset;

    int clients = 10;
    int rounds = 10;
    double target = 0.95;
    int client_epochs = 200;

    double d_threshold = logic::kDefaultDiagonalityThreshold;
    double e_threshold = logic::kDefaultExclusivityThreshold;
    double theta = 0.7;
    int beam_width = 8;
    double tau = 0.5;
    std::optional<logic::Connector> forced_connector;
    int ddt_depth = baselines::kDefaultTreeDepth;

    double temperature = 5.0;
    double entropy_coeff = 0.01;
    double learning_rate = 2.0;
    int model_epochs = 200;

    double noise_t = 0.0;
    double noise_s = 1.0;
    uint64_t noise_seed = 0;

    std::vector<std::string> methods;
    std::string output_dir = "out";

    static Config from_json(const nlohmann::json& raw);

    /// The effective configuration with every default materialized, in a
    /// stable key order.
    nlohmann::ordered_json echo() const;

    model::ClassifierOptions classifier_options() const;
    fl::FederationConfig federation_config(int workers) const;
};

Config load_config(const std::string& path);
Config parse_config_text(const std::string& text);

/// Applies `--section.key value` style overrides to a raw config document.
/// The value is parsed as JSON when possible and as a string otherwise.
void apply_override(nlohmann::json& raw, const std::string& dotted_key,
                    const std::string& value);

model::ConceptDataset build_dataset(const DatasetConfig& config);

struct Prepared {
    model::ConceptDataset dataset;
    data::FederatedPartition partition;
    std::vector<int> noisy_clients;
};

/// Dataset, partition and noise exactly as a run would see them.
Prepared prepare(const Config& config);

struct RunArtifacts {
    nlohmann::ordered_json results;
    std::string metrics_csv;
    std::string rule_report;
};

RunArtifacts run(const Config& config, int workers = 1);

/// Writes results.json, metrics.csv, rules.txt and a manifest under
/// `output_dir`.
void write_bundle(const RunArtifacts& artifacts, const std::string& output_dir);

inline const std::vector<double> kDefaultNoiseLevels = {0.0, 0.2, 0.4, 0.6, 0.8};

struct SweepArtifacts {
    std::string summary_csv;
    std::vector<std::string> bundle_dirs;
};

/// Runs every configured method at every noise level on shared partitions;
/// bundles land under `<output_dir>/noise_<level>/<method>/`.
SweepArtifacts sweep_noise(const Config& config,
                           const std::vector<double>& levels, int workers = 1);

std::string inspect_rules(const nlohmann::json& results,
                          const std::string& class_filter);
std::string inspect_rules_file(const std::string& results_path,
                               const std::string& class_filter);

std::string format_fraction(double value);
uint64_t fnv1a_hash(const std::string& text);

}  // namespace lrxfl::runner
