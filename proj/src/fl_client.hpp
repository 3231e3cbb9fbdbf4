#pragma once

#include <optional>
#include <span>
#include <vector>

#include "datasets.hpp"
#include "logic.hpp"
#include "model.hpp"

namespace lrxfl::fl {

struct ClientState {
    int client_id = 0;
    model::EntropyClassifier model;
    data::ClientData data;
};

/// One client's per-round upload.
struct ClientUpdate {
    int client_id = 0;
    std::vector<double> parameters;
    std::vector<std::optional<logic::ClassRule>> class_rules;  // one per class
    logic::Connector connector_vote = logic::Connector::And;
    double local_model_accuracy = 0.0;
    int sample_count = 0;
};

struct RuleSettings {
    double d_threshold = logic::kDefaultDiagonalityThreshold;
    double e_threshold = logic::kDefaultExclusivityThreshold;
    std::optional<logic::Connector> forced_connector;  // baselines/ablation
};

/// Ranks each class's sample rules by validation rule accuracy (ties:
/// higher support, then canonical order) and grows the fused rule by
/// including a candidate only when validation accuracy strictly improves.
/// Candidates whose inclusion would contradict an AND fusion are skipped.
std::vector<std::optional<logic::ClassRule>> aggregate_local_rules(
    const std::vector<model::TruthTable>& tables, logic::Connector connector,
    const model::ConceptDataset& validation, int owner_client_id = -1);

/// Algorithm lines run on one client per round: adopt the global
/// parameters, train locally, extract and aggregate rules, pick the local
/// connector over the pooled sample rules, and report validation accuracy.
ClientUpdate local_round(ClientState& state,
                         std::span<const double> global_parameters, int epochs,
                         const RuleSettings& settings);

}  // namespace lrxfl::fl
