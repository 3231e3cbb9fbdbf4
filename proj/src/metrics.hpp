#pragma once

#include <optional>
#include <span>
#include <vector>

#include "logic.hpp"
#include "model.hpp"

namespace lrxfl::metrics {

/// Confusion counts behind a rule accuracy value: `positives` samples carry
/// the class label, `true_positives` of them satisfy the rule, and
/// `true_negatives` of the remaining `negatives` do not.
struct RuleEvalCounts {
    long long positives = 0;       // P
    long long negatives = 0;       // Q
    long long true_positives = 0;  // p
    long long true_negatives = 0;  // q
};

double model_accuracy(std::span<const int> predictions,
                      std::span<const int> labels);

/// (p+q)/(P+Q) against ground-truth labels. An absent rule satisfies no
/// sample, so p = 0 and q = Q.
std::pair<double, RuleEvalCounts> rule_accuracy(
    const std::optional<logic::ClassRule>& rule,
    const model::ConceptDataset& data, int class_id);

/// Same ratio with the model's predictions in place of the labels.
std::pair<double, RuleEvalCounts> rule_fidelity(
    const std::optional<logic::ClassRule>& rule,
    const model::EntropyClassifier& model, const model::ConceptDataset& data,
    int class_id);

struct MetricsReport {
    double model_accuracy = 0.0;
    // One entry per class; nullopt marks a class without a rule. Such
    // classes are excluded from the two means below.
    std::vector<std::optional<double>> per_class_rule_accuracy;
    std::vector<std::optional<double>> per_class_rule_fidelity;
    double mean_rule_accuracy = 0.0;
    double mean_rule_fidelity = 0.0;
    int classes_without_rule = 0;
};

MetricsReport evaluate(const model::EntropyClassifier& model,
                       const std::vector<std::optional<logic::ClassRule>>& rules,
                       const model::ConceptDataset& data);

}  // namespace lrxfl::metrics
