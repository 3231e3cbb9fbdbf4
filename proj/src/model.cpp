#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace lrxfl::model {

namespace {

// softmax with the usual max-shift; `values` is overwritten.
void softmax_inplace(std::vector<double>& values) {
    const double peak = *std::max_element(values.begin(), values.end());
    double total = 0.0;
    for (double& v : values) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : values) v /= total;
}

double sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

}  // namespace

void ConceptDataset::validate() const {
    if (labels.size() != concepts.size()) {
        throw InvalidInputError("dataset has " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(concepts.size()) +
                                " samples");
    }
    const size_t n = concept_names.size();
    for (size_t i = 0; i < concepts.size(); ++i) {
        if (concepts[i].size() != n) {
            throw InvalidInputError("sample " + std::to_string(i) + " has " +
                                    std::to_string(concepts[i].size()) +
                                    " concepts, expected " + std::to_string(n));
        }
        if (labels[i] < 0 || labels[i] >= num_classes()) {
            throw InvalidInputError("sample " + std::to_string(i) +
                                    " has out-of-range label " +
                                    std::to_string(labels[i]));
        }
    }
}

EntropyClassifier::EntropyClassifier(int num_classes, int num_concepts,
                                     uint64_t seed, ClassifierOptions options)
    : num_concepts_(num_concepts), options_(options) {
    if (num_classes < 1 || num_concepts < 1) {
        throw InvalidInputError("classifier needs at least one class and one concept");
    }
    if (options_.temperature <= 0.0) {
        throw InvalidInputError("temperature must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    weights_.assign(num_classes, std::vector<double>(num_concepts));
    biases_.assign(num_classes, 0.0);
    for (auto& row : weights_) {
        for (double& w : row) w = dist(rng);
    }
}

std::vector<double> EntropyClassifier::relevance(int class_id) const {
    std::vector<double> rel(num_concepts_);
    for (int j = 0; j < num_concepts_; ++j) {
        rel[j] = std::abs(weights_[class_id][j]) / options_.temperature;
    }
    softmax_inplace(rel);
    return rel;
}

std::vector<double> EntropyClassifier::class_scores(
    const std::vector<bool>& sample) const {
    if (static_cast<int>(sample.size()) != num_concepts_) {
        throw InvalidInputError("sample has " + std::to_string(sample.size()) +
                                " concepts, model expects " +
                                std::to_string(num_concepts_));
    }
    std::vector<double> scores(num_classes());
    for (int c = 0; c < num_classes(); ++c) {
        const std::vector<double> rel = relevance(c);
        double s = biases_[c];
        for (int j = 0; j < num_concepts_; ++j) {
            if (sample[j]) s += rel[j] * weights_[c][j];
        }
        scores[c] = s;
    }
    return scores;
}

int EntropyClassifier::predict(const std::vector<bool>& sample) const {
    const std::vector<double> scores = class_scores(sample);
    int best = 0;
    for (int c = 1; c < num_classes(); ++c) {
        if (scores[c] > scores[best]) best = c;
    }
    return best;
}

std::vector<bool> mask_from_relevance(std::span<const double> relevance,
                                      double tau) {
    const double peak = *std::max_element(relevance.begin(), relevance.end());
    std::vector<bool> mask(relevance.size());
    for (size_t j = 0; j < relevance.size(); ++j) {
        mask[j] = relevance[j] >= tau * peak;
    }
    return mask;
}

std::vector<bool> EntropyClassifier::active_mask(int class_id) const {
    return mask_from_relevance(relevance(class_id), options_.mask_fraction);
}

double EntropyClassifier::loss(const ConceptDataset& data) const {
    const int C = num_classes();
    double data_loss = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
        std::vector<double> scores = class_scores(data.concepts[i]);
        const double peak = *std::max_element(scores.begin(), scores.end());
        double lse = 0.0;
        for (double s : scores) lse += std::exp(s - peak);
        data_loss -= scores[data.labels[i]] - peak - std::log(lse);
    }
    data_loss /= static_cast<double>(data.size());

    double entropy_total = 0.0;
    for (int c = 0; c < C; ++c) {
        for (double r : relevance(c)) {
            if (r > 0.0) entropy_total -= r * std::log(r);
        }
    }
    return data_loss + options_.entropy_coeff * entropy_total;
}

std::vector<double> EntropyClassifier::train(const ConceptDataset& data) {
    return train(data, options_.epochs);
}

std::vector<double> EntropyClassifier::train(const ConceptDataset& data,
                                             int epochs) {
    data.validate();
    if (data.size() == 0) {
        throw InvalidInputError("cannot train on an empty dataset");
    }
    if (data.num_classes() != num_classes() ||
        data.num_concepts() != num_concepts_) {
        throw InvalidInputError("dataset shape does not match the model");
    }

    const int C = num_classes();
    const int n = num_concepts_;
    const double S = static_cast<double>(data.size());
    const double T = options_.temperature;
    const double lambda = options_.entropy_coeff;

    std::vector<double> trace;
    trace.reserve(epochs + 1);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double current = loss(data);
        if (!std::isfinite(current)) {
            throw DivergenceError("training loss became non-finite at epoch " +
                                      std::to_string(epoch),
                                  epoch);
        }
        trace.push_back(current);

        // Per-class relevance, gated dot products and entropies are shared
        // across the batch.
        std::vector<std::vector<double>> rel(C);
        std::vector<double> entropy(C, 0.0);
        for (int c = 0; c < C; ++c) {
            rel[c] = relevance(c);
            for (double r : rel[c]) {
                if (r > 0.0) entropy[c] -= r * std::log(r);
            }
        }

        std::vector<std::vector<double>> grad_w(C, std::vector<double>(n, 0.0));
        std::vector<double> grad_b(C, 0.0);

        for (size_t i = 0; i < data.size(); ++i) {
            const std::vector<bool>& x = data.concepts[i];
            std::vector<double> gated(C, 0.0);  // sum_j r_cj w_cj x_j
            std::vector<double> probs(C);
            for (int c = 0; c < C; ++c) {
                for (int j = 0; j < n; ++j) {
                    if (x[j]) gated[c] += rel[c][j] * weights_[c][j];
                }
                probs[c] = gated[c] + biases_[c];
            }
            softmax_inplace(probs);

            for (int c = 0; c < C; ++c) {
                const double delta =
                    (probs[c] - (data.labels[i] == c ? 1.0 : 0.0)) / S;
                grad_b[c] += delta;
                for (int j = 0; j < n; ++j) {
                    const double xj = x[j] ? 1.0 : 0.0;
                    // d score_c / d w_cj: direct term plus the shift of the
                    // relevance softmax through |w|.
                    const double direct = rel[c][j] * xj;
                    const double through_rel =
                        sign(weights_[c][j]) / T * rel[c][j] *
                        (weights_[c][j] * xj - gated[c]);
                    grad_w[c][j] += delta * (direct + through_rel);
                }
            }
        }

        // Entropy penalty gradient.
        if (lambda != 0.0) {
            for (int c = 0; c < C; ++c) {
                for (int j = 0; j < n; ++j) {
                    const double r = rel[c][j];
                    if (r <= 0.0) continue;
                    grad_w[c][j] += lambda * (-r * (std::log(r) + entropy[c])) *
                                    sign(weights_[c][j]) / T;
                }
            }
        }

        for (int c = 0; c < C; ++c) {
            biases_[c] -= options_.learning_rate * grad_b[c];
            for (int j = 0; j < n; ++j) {
                weights_[c][j] -= options_.learning_rate * grad_w[c][j];
            }
        }
    }

    const double final_loss = loss(data);
    if (!std::isfinite(final_loss)) {
        throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epochs),
                              epochs);
    }
    trace.push_back(final_loss);
    return trace;
}

std::vector<double> EntropyClassifier::parameters() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(num_classes()) * num_concepts_ +
                num_classes());
    for (const auto& row : weights_) {
        out.insert(out.end(), row.begin(), row.end());
    }
    out.insert(out.end(), biases_.begin(), biases_.end());
    return out;
}

void EntropyClassifier::set_parameters(std::span<const double> params) {
    const size_t expected =
        static_cast<size_t>(num_classes()) * num_concepts_ + num_classes();
    if (params.size() != expected) {
        throw InvalidInputError("parameter snapshot has " +
                                std::to_string(params.size()) +
                                " values, expected " + std::to_string(expected));
    }
    size_t k = 0;
    for (auto& row : weights_) {
        for (double& w : row) w = params[k++];
    }
    for (double& b : biases_) b = params[k++];
}

TruthTable build_truth_table(const EntropyClassifier& model,
                             const ConceptDataset& data, int class_id) {
    if (class_id < 0 || class_id >= model.num_classes()) {
        throw IndexError("class " + std::to_string(class_id) +
                         " out of range for " +
                         std::to_string(model.num_classes()) + " classes");
    }
    const std::vector<bool> mask = model.active_mask(class_id);

    TruthTable table;
    table.class_id = class_id;
    std::map<logic::ConjunctiveRule, int> rows;
    for (size_t i = 0; i < data.size(); ++i) {
        if (model.predict(data.concepts[i]) != class_id) continue;
        std::vector<logic::Literal> literals;
        for (int j = 0; j < data.num_concepts(); ++j) {
            if (mask[j]) {
                literals.push_back({j, static_cast<bool>(data.concepts[i][j])});
            }
        }
        rows[logic::ConjunctiveRule(std::move(literals))] += 1;
    }
    for (auto& [rule, count] : rows) {
        table.rows.push_back(rule);
        table.support.push_back(count);
    }
    return table;
}

std::vector<logic::ConjunctiveRule> extract_sample_rules(
    const TruthTable& table) {
    std::vector<size_t> order(table.rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (table.support[a] != table.support[b]) {
            return table.support[a] > table.support[b];
        }
        return table.rows[a] < table.rows[b];
    });
    std::vector<logic::ConjunctiveRule> rules;
    rules.reserve(order.size());
    for (size_t idx : order) rules.push_back(table.rows[idx]);
    return rules;
}

}  // namespace lrxfl::model
