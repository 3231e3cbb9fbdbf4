#pragma once

#include <optional>
#include <vector>

#include "datasets.hpp"
#include "federation.hpp"
#include "logic.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace lrxfl::baselines {

/// Binary decision tree over boolean concepts, split by information gain.
class DecisionTree {
public:
    struct Node {
        int split_concept = -1;  // -1 marks a leaf
        int low_child = -1;      // concept false
        int high_child = -1;     // concept true
        int leaf_class = -1;
    };

    static DecisionTree fit(const model::ConceptDataset& data, int max_depth);

    int predict(const std::vector<bool>& sample) const;

    /// One rule per class: the disjunction of root-to-leaf paths ending in
    /// that class. A literal is positive when the path takes the
    /// above-split branch. Classes with no usable path get no rule.
    std::vector<std::optional<logic::ClassRule>> class_rules() const;

    const std::vector<Node>& nodes() const { return nodes_; }
    int num_classes() const { return num_classes_; }

private:
    std::vector<Node> nodes_;
    int num_classes_ = 0;
};

inline constexpr int kDefaultTreeDepth = 6;

struct CentralisedResult {
    model::EntropyClassifier model;
    std::vector<std::optional<logic::ClassRule>> rules;
    metrics::MetricsReport report;
};

/// Entropy classifier on the pooled client training data; sample rules
/// aggregated per class with the connector forced to OR.
CentralisedResult run_centralised(const data::FederatedPartition& partition,
                                  uint64_t model_seed,
                                  const model::ClassifierOptions& options);

struct DdtResult {
    int selected_client = -1;
    DecisionTree tree;
    std::vector<std::optional<logic::ClassRule>> rules;
    metrics::MetricsReport report;
};

/// Each client fits a tree; the server adopts the one whose path rules
/// score best on the server validation set. No further iteration.
DdtResult run_ddt(const data::FederatedPartition& partition, int max_depth);

/// The federated loop with OR forced at both levels, unconditional rule
/// union, and uniform model weights.
fl::FederationResult run_fedavg_logic(const data::FederatedPartition& partition,
                                      fl::FederationConfig config);

/// The full loop with the connector choice overridden everywhere.
fl::FederationResult run_ablated(const data::FederatedPartition& partition,
                                 fl::FederationConfig config,
                                 logic::Connector forced_connector);

}  // namespace lrxfl::baselines
