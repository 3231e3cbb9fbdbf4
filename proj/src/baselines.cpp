#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace lrxfl::baselines {

namespace {

double label_entropy(const std::vector<int>& labels,
                     const std::vector<size_t>& rows, int num_classes) {
    std::vector<int> counts(num_classes, 0);
    for (size_t r : rows) counts[labels[r]] += 1;
    double entropy = 0.0;
    for (int count : counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) /
                         static_cast<double>(rows.size());
        entropy -= p * std::log2(p);
    }
    return entropy;
}

int majority_class(const std::vector<int>& labels,
                   const std::vector<size_t>& rows, int num_classes) {
    std::vector<int> counts(num_classes, 0);
    for (size_t r : rows) counts[labels[r]] += 1;
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return best;
}

}  // namespace

DecisionTree DecisionTree::fit(const model::ConceptDataset& data,
                               int max_depth) {
    data.validate();
    if (data.size() == 0) {
        throw InvalidInputError("cannot fit a tree on an empty dataset");
    }
    DecisionTree tree;
    tree.num_classes_ = data.num_classes();
    const int n = data.num_concepts();

    std::function<int(std::vector<size_t>, int)> grow =
        [&](std::vector<size_t> rows, int depth) -> int {
        const double node_entropy =
            label_entropy(data.labels, rows, tree.num_classes_);

        int best_concept = -1;
        double best_gain = 0.0;
        std::vector<size_t> best_low, best_high;
        if (depth < max_depth && node_entropy > 0.0) {
            for (int j = 0; j < n; ++j) {
                std::vector<size_t> low, high;
                for (size_t r : rows) {
                    (data.concepts[r][j] ? high : low).push_back(r);
                }
                if (low.empty() || high.empty()) continue;
                const double split_entropy =
                    (static_cast<double>(low.size()) * label_entropy(data.labels, low, tree.num_classes_) +
                     static_cast<double>(high.size()) * label_entropy(data.labels, high, tree.num_classes_)) /
                    static_cast<double>(rows.size());
                const double gain = node_entropy - split_entropy;
                // Strictly positive gain, ties to the lowest concept id.
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_concept = j;
                    best_low = std::move(low);
                    best_high = std::move(high);
                }
            }
        }

        const int index = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        if (best_concept < 0) {
            tree.nodes_[index].leaf_class =
                majority_class(data.labels, rows, tree.num_classes_);
            return index;
        }
        tree.nodes_[index].split_concept = best_concept;
        const int low_child = grow(std::move(best_low), depth + 1);
        tree.nodes_[index].low_child = low_child;
        const int high_child = grow(std::move(best_high), depth + 1);
        tree.nodes_[index].high_child = high_child;
        return index;
    };

    std::vector<size_t> all(data.size());
    std::iota(all.begin(), all.end(), size_t{0});
    grow(std::move(all), 0);
    return tree;
}

int DecisionTree::predict(const std::vector<bool>& sample) const {
    int index = 0;
    while (nodes_[index].split_concept >= 0) {
        const Node& node = nodes_[index];
        if (node.split_concept >= static_cast<int>(sample.size())) {
            throw IndexError("tree splits on concept " +
                             std::to_string(node.split_concept) +
                             " beyond the sample width");
        }
        index = sample[node.split_concept] ? node.high_child : node.low_child;
    }
    return nodes_[index].leaf_class;
}

std::vector<std::optional<logic::ClassRule>> DecisionTree::class_rules() const {
    std::vector<std::vector<logic::ConjunctiveRule>> clauses(num_classes_);

    std::function<void(int, std::vector<logic::Literal>&)> walk =
        [&](int index, std::vector<logic::Literal>& path) {
            const Node& node = nodes_[index];
            if (node.split_concept < 0) {
                if (!path.empty()) {
                    clauses[node.leaf_class].emplace_back(path);
                }
                return;
            }
            path.push_back({node.split_concept, false});
            walk(node.low_child, path);
            path.back().positive = true;
            walk(node.high_child, path);
            path.pop_back();
        };

    std::vector<logic::Literal> path;
    walk(0, path);

    std::vector<std::optional<logic::ClassRule>> rules;
    for (int c = 0; c < num_classes_; ++c) {
        if (clauses[c].empty()) {
            rules.push_back(std::nullopt);
        } else {
            rules.push_back(
                logic::fuse_clauses(clauses[c], logic::Connector::Or, c));
        }
    }
    return rules;
}

CentralisedResult run_centralised(const data::FederatedPartition& partition,
                                  uint64_t model_seed,
                                  const model::ClassifierOptions& options) {
    model::ConceptDataset train;
    model::ConceptDataset validation;
    train.concept_names = partition.server_validation.concept_names;
    train.class_names = partition.server_validation.class_names;
    validation.concept_names = train.concept_names;
    validation.class_names = train.class_names;
    for (const data::ClientData& client : partition.clients) {
        train.concepts.insert(train.concepts.end(), client.train.concepts.begin(),
                              client.train.concepts.end());
        train.labels.insert(train.labels.end(), client.train.labels.begin(),
                            client.train.labels.end());
        validation.concepts.insert(validation.concepts.end(),
                                   client.validation.concepts.begin(),
                                   client.validation.concepts.end());
        validation.labels.insert(validation.labels.end(),
                                 client.validation.labels.begin(),
                                 client.validation.labels.end());
    }

    CentralisedResult result{
        model::EntropyClassifier(train.num_classes(), train.num_concepts(),
                                 model_seed, options),
        {},
        {}};
    result.model.train(train);

    std::vector<model::TruthTable> tables;
    for (int c = 0; c < train.num_classes(); ++c) {
        tables.push_back(model::build_truth_table(result.model, train, c));
    }
    result.rules = fl::aggregate_local_rules(tables, logic::Connector::Or,
                                             validation);
    result.report = metrics::evaluate(result.model, result.rules,
                                      partition.server_test);
    return result;
}

DdtResult run_ddt(const data::FederatedPartition& partition, int max_depth) {
    if (partition.clients.empty()) {
        throw InvalidInputError("DDT requires at least one client");
    }
    const model::ConceptDataset& validation = partition.server_validation;
    const model::ConceptDataset& test = partition.server_test;
    const int num_classes = static_cast<int>(validation.class_names.size());

    DdtResult result;
    double best_score = -1.0;
    for (size_t k = 0; k < partition.clients.size(); ++k) {
        DecisionTree tree = DecisionTree::fit(partition.clients[k].train,
                                              max_depth);
        const auto rules = tree.class_rules();
        double score_sum = 0.0;
        int scored = 0;
        for (int c = 0; c < num_classes; ++c) {
            if (!rules[c]) continue;
            score_sum += metrics::rule_accuracy(rules[c], validation, c).first;
            ++scored;
        }
        const double score = scored > 0 ? score_sum / scored : 0.0;
        if (score > best_score) {
            best_score = score;
            result.selected_client = static_cast<int>(k);
            result.tree = std::move(tree);
            result.rules = rules;
        }
    }

    // Metrics against the adopted tree: fidelity compares the path rules
    // with the tree's own predictions.
    std::vector<int> predictions(test.size());
    for (size_t i = 0; i < test.size(); ++i) {
        predictions[i] = result.tree.predict(test.concepts[i]);
    }
    result.report.model_accuracy =
        metrics::model_accuracy(predictions, test.labels);
    double accuracy_sum = 0.0, fidelity_sum = 0.0;
    int with_rule = 0;
    for (int c = 0; c < num_classes; ++c) {
        if (!result.rules[c]) {
            result.report.per_class_rule_accuracy.push_back(std::nullopt);
            result.report.per_class_rule_fidelity.push_back(std::nullopt);
            result.report.classes_without_rule += 1;
            continue;
        }
        const double acc =
            metrics::rule_accuracy(result.rules[c], test, c).first;
        long long agree = 0;
        for (size_t i = 0; i < test.size(); ++i) {
            const bool satisfied = result.rules[c]->evaluate(test.concepts[i]);
            if (satisfied == (predictions[i] == c)) ++agree;
        }
        const double fid = static_cast<double>(agree) /
                           static_cast<double>(test.size());
        result.report.per_class_rule_accuracy.push_back(acc);
        result.report.per_class_rule_fidelity.push_back(fid);
        accuracy_sum += acc;
        fidelity_sum += fid;
        ++with_rule;
    }
    if (with_rule > 0) {
        result.report.mean_rule_accuracy = accuracy_sum / with_rule;
        result.report.mean_rule_fidelity = fidelity_sum / with_rule;
    }
    return result;
}

fl::FederationResult run_fedavg_logic(const data::FederatedPartition& partition,
                                      fl::FederationConfig config) {
    config.forced_connector = logic::Connector::Or;
    config.unconditional_union = true;
    config.uniform_weights = true;
    return fl::run_federation(partition, config);
}

fl::FederationResult run_ablated(const data::FederatedPartition& partition,
                                 fl::FederationConfig config,
                                 logic::Connector forced_connector) {
    config.forced_connector = forced_connector;
    return fl::run_federation(partition, config);
}

}  // namespace lrxfl::baselines
