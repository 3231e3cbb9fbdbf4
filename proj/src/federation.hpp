#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "datasets.hpp"
#include "fl_client.hpp"
#include "fl_server.hpp"
#include "metrics.hpp"

namespace lrxfl::fl {

/// Knobs of the federated loop. The three override flags turn the loop
/// into the FedAvg-Logic baseline; `forced_connector` alone gives the
/// connector ablation.
struct FederationConfig {
    int rounds = 10;
    double target = 0.95;
    int client_epochs = 200;

    double d_threshold = logic::kDefaultDiagonalityThreshold;
    double e_threshold = logic::kDefaultExclusivityThreshold;
    double theta = 0.7;
    int beam_width = 8;

    std::optional<logic::Connector> forced_connector;
    bool unconditional_union = false;
    bool uniform_weights = false;
    bool apply_theta_filter = true;

    uint64_t model_seed = 0;
    model::ClassifierOptions model_options;
    int workers = 1;
};

struct RoundRecord {
    int round = 0;  // 1-based
    logic::Connector connector = logic::Connector::And;
    GlobalRuleSet rules;
    std::vector<double> weights;
    metrics::MetricsReport validation_metrics;
    metrics::MetricsReport test_metrics;
    std::vector<ClientUpdate> updates;
};

struct FederationResult {
    std::vector<RoundRecord> rounds;
    model::EntropyClassifier final_model;
};

FederationResult run_federation(const data::FederatedPartition& partition,
                                const FederationConfig& config);

}  // namespace lrxfl::fl
