#include "metrics.hpp"

namespace lrxfl::metrics {

namespace {

std::pair<double, RuleEvalCounts> counts_against(
    const std::optional<logic::ClassRule>& rule,
    const model::ConceptDataset& data, std::span<const int> reference,
    int class_id) {
    if (data.size() == 0) {
        throw InvalidInputError("rule accuracy over an empty dataset");
    }
    RuleEvalCounts counts;
    for (size_t i = 0; i < data.size(); ++i) {
        const bool is_positive = reference[i] == class_id;
        const bool satisfied = rule && rule->evaluate(data.concepts[i]);
        if (is_positive) {
            counts.positives += 1;
            if (satisfied) counts.true_positives += 1;
        } else {
            counts.negatives += 1;
            if (!satisfied) counts.true_negatives += 1;
        }
    }
    const double accuracy =
        static_cast<double>(counts.true_positives + counts.true_negatives) /
        static_cast<double>(counts.positives + counts.negatives);
    return {accuracy, counts};
}

}  // namespace

double model_accuracy(std::span<const int> predictions,
                      std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw InvalidInputError("prediction and label counts differ");
    }
    if (predictions.empty()) {
        throw InvalidInputError("model accuracy over an empty dataset");
    }
    size_t correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::pair<double, RuleEvalCounts> rule_accuracy(
    const std::optional<logic::ClassRule>& rule,
    const model::ConceptDataset& data, int class_id) {
    return counts_against(rule, data, data.labels, class_id);
}

std::pair<double, RuleEvalCounts> rule_fidelity(
    const std::optional<logic::ClassRule>& rule,
    const model::EntropyClassifier& model, const model::ConceptDataset& data,
    int class_id) {
    std::vector<int> predicted(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        predicted[i] = model.predict(data.concepts[i]);
    }
    return counts_against(rule, data, predicted, class_id);
}

MetricsReport evaluate(const model::EntropyClassifier& model,
                       const std::vector<std::optional<logic::ClassRule>>& rules,
                       const model::ConceptDataset& data) {
    MetricsReport report;

    std::vector<int> predictions(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        predictions[i] = model.predict(data.concepts[i]);
    }
    report.model_accuracy = model_accuracy(predictions, data.labels);

    double accuracy_sum = 0.0;
    double fidelity_sum = 0.0;
    int with_rule = 0;
    static const std::optional<logic::ClassRule> kAbsent;
    for (int c = 0; c < data.num_classes(); ++c) {
        const auto& rule =
            c < static_cast<int>(rules.size()) ? rules[c] : kAbsent;
        if (!rule) {
            report.per_class_rule_accuracy.push_back(std::nullopt);
            report.per_class_rule_fidelity.push_back(std::nullopt);
            report.classes_without_rule += 1;
            continue;
        }
        const double acc = rule_accuracy(rule, data, c).first;
        const double fid = rule_fidelity(rule, model, data, c).first;
        report.per_class_rule_accuracy.push_back(acc);
        report.per_class_rule_fidelity.push_back(fid);
        accuracy_sum += acc;
        fidelity_sum += fid;
        with_rule += 1;
    }
    if (with_rule > 0) {
        report.mean_rule_accuracy = accuracy_sum / with_rule;
        report.mean_rule_fidelity = fidelity_sum / with_rule;
    }
    return report;
}

}  // namespace lrxfl::metrics
