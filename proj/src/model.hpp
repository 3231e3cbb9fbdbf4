#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "logic.hpp"

namespace lrxfl::model {

/// Boolean concept matrix with class labels and the two vocabularies.
struct ConceptDataset {
    std::vector<std::vector<bool>> concepts;  // S rows, one per sample
    std::vector<int> labels;                  // S values in 0..C-1
    std::vector<std::string> concept_names;
    std::vector<std::string> class_names;

    size_t size() const { return concepts.size(); }
    int num_concepts() const { return static_cast<int>(concept_names.size()); }
    int num_classes() const { return static_cast<int>(class_names.size()); }

    void validate() const;
};

struct ClassifierOptions {
    double temperature = 5.0;
    double entropy_coeff = 0.01;   // weight of the relevance-entropy penalty
    double mask_fraction = 0.5;    // tau: relative relevance cutoff for masks
    double learning_rate = 2.0;
    int epochs = 200;
};

/// Linear concept->class classifier whose per-class concept relevance
/// (a softmax over absolute weights) gates the scores and drives the
/// binary masks used for rule extraction.
class EntropyClassifier {
public:
    EntropyClassifier(int num_classes, int num_concepts, uint64_t seed,
                      ClassifierOptions options = {});

    int num_classes() const { return static_cast<int>(biases_.size()); }
    int num_concepts() const { return num_concepts_; }
    const ClassifierOptions& options() const { return options_; }

    /// Probability distribution over concepts for one class; sums to 1.
    std::vector<double> relevance(int class_id) const;

    std::vector<double> class_scores(const std::vector<bool>& sample) const;

    /// Argmax class; ties go to the lowest class id.
    int predict(const std::vector<bool>& sample) const;

    /// Concept j is active when relevance_j >= tau * max relevance.
    std::vector<bool> active_mask(int class_id) const;

    /// Full-batch gradient descent on cross-entropy plus the entropy
    /// penalty. Returns the per-epoch loss trace; throws DivergenceError
    /// if the loss leaves the finite range.
    std::vector<double> train(const ConceptDataset& data);
    std::vector<double> train(const ConceptDataset& data, int epochs);

    /// Flattened trainable parameters: weights row-major, then biases.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);

    // Direct access used by training, tests and the gradient check.
    std::vector<std::vector<double>>& weights() { return weights_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    std::vector<double>& biases() { return biases_; }
    const std::vector<double>& biases() const { return biases_; }

    /// Loss at the current parameters (data term plus entropy penalty).
    double loss(const ConceptDataset& data) const;

private:
    int num_concepts_;
    std::vector<std::vector<double>> weights_;  // C x n
    std::vector<double> biases_;                // C
    ClassifierOptions options_;
};

/// Mask cutoff shared by EntropyClassifier::active_mask: keeps every
/// concept whose relevance reaches tau times the maximum.
std::vector<bool> mask_from_relevance(std::span<const double> relevance,
                                      double tau);

/// Deduplicated masked concept patterns of the samples predicted as one
/// class, with per-pattern sample counts.
struct TruthTable {
    int class_id = 0;
    std::vector<logic::ConjunctiveRule> rows;
    std::vector<int> support;
};

TruthTable build_truth_table(const EntropyClassifier& model,
                             const ConceptDataset& data, int class_id);

/// Table rows as rules, ordered by descending support, ties in canonical
/// order.
std::vector<logic::ConjunctiveRule> extract_sample_rules(
    const TruthTable& table);

}  // namespace lrxfl::model
