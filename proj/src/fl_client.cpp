#include "fl_client.hpp"

#include <algorithm>
#include <numeric>

#include "metrics.hpp"

namespace lrxfl::fl {

namespace {

struct Candidate {
    const logic::ConjunctiveRule* rule;
    int support;
    double accuracy;
    std::vector<bool> satisfied;  // per validation sample
};

double fraction(long long numerator, long long denominator) {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

std::vector<std::optional<logic::ClassRule>> aggregate_local_rules(
    const std::vector<model::TruthTable>& tables, logic::Connector connector,
    const model::ConceptDataset& validation, int owner_client_id) {
    if (validation.size() == 0) {
        throw InvalidInputError(
            "rule aggregation requires a nonempty validation split");
    }
    const size_t V = validation.size();

    std::vector<std::optional<logic::ClassRule>> result;
    result.reserve(tables.size());

    for (const model::TruthTable& table : tables) {
        const int class_id = table.class_id;
        long long positives = 0;
        for (int label : validation.labels) {
            if (label == class_id) ++positives;
        }
        const long long negatives = static_cast<long long>(V) - positives;

        std::vector<Candidate> candidates;
        candidates.reserve(table.rows.size());
        for (size_t r = 0; r < table.rows.size(); ++r) {
            Candidate cand;
            cand.rule = &table.rows[r];
            cand.support = table.support[r];
            cand.satisfied.resize(V);
            long long p = 0, q = 0;
            for (size_t i = 0; i < V; ++i) {
                const bool sat = cand.rule->evaluate(validation.concepts[i]);
                cand.satisfied[i] = sat;
                if (validation.labels[i] == class_id) {
                    if (sat) ++p;
                } else if (!sat) {
                    ++q;
                }
            }
            cand.accuracy = fraction(p + q, positives + negatives);
            candidates.push_back(std::move(cand));
        }

        // O(N log N) ranking: accuracy desc, support desc, canonical order.
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) {
                      if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
                      if (a.support != b.support) return a.support > b.support;
                      return *a.rule < *b.rule;
                  });

        // O(N) inclusion sweep over the cached satisfaction vectors. The
        // absent rule claims nothing, so the incumbent starts at q = Q.
        std::vector<logic::ConjunctiveRule> included;
        std::vector<bool> fused_sat(V, connector == logic::Connector::And);
        double incumbent = fraction(negatives, positives + negatives);

        for (const Candidate& cand : candidates) {
            if (connector == logic::Connector::And && !included.empty()) {
                // A contradiction with the running conjunction disqualifies
                // the candidate, not the aggregation.
                bool conflicts = false;
                for (const logic::Literal& lit : included.front().literals()) {
                    for (const logic::Literal& other : cand.rule->literals()) {
                        if (lit.concept_id == other.concept_id &&
                            lit.positive != other.positive) {
                            conflicts = true;
                            break;
                        }
                    }
                    if (conflicts) break;
                }
                if (conflicts) continue;
            }

            std::vector<bool> next_sat(V);
            long long p = 0, q = 0;
            for (size_t i = 0; i < V; ++i) {
                const bool sat = connector == logic::Connector::And
                                     ? (included.empty()
                                            ? cand.satisfied[i]
                                            : (fused_sat[i] && cand.satisfied[i]))
                                     : (fused_sat[i] || cand.satisfied[i]);
                next_sat[i] = sat;
                if (validation.labels[i] == class_id) {
                    if (sat) ++p;
                } else if (!sat) {
                    ++q;
                }
            }
            const double accuracy = fraction(p + q, positives + negatives);
            if (accuracy > incumbent) {
                incumbent = accuracy;
                fused_sat = std::move(next_sat);
                if (connector == logic::Connector::And && !included.empty()) {
                    included[0] = logic::fuse_clauses(
                                      std::vector<logic::ConjunctiveRule>{
                                          included.front(), *cand.rule},
                                      logic::Connector::And, class_id)
                                      .clauses.front();
                } else {
                    included.push_back(*cand.rule);
                }
            }
        }

        if (included.empty()) {
            result.push_back(std::nullopt);
            continue;
        }
        std::vector<int> owners;
        if (owner_client_id >= 0) {
            owners.assign(included.size(), owner_client_id);
        }
        result.push_back(
            logic::fuse_clauses(included, connector, class_id, owners));
    }
    return result;
}

ClientUpdate local_round(ClientState& state,
                         std::span<const double> global_parameters, int epochs,
                         const RuleSettings& settings) {
    state.model.set_parameters(global_parameters);
    if (epochs > 0) {
        state.model.train(state.data.train, epochs);
    }

    const int num_classes = state.model.num_classes();
    std::vector<model::TruthTable> tables;
    tables.reserve(num_classes);
    std::vector<logic::ConjunctiveRule> pooled;
    for (int c = 0; c < num_classes; ++c) {
        tables.push_back(
            model::build_truth_table(state.model, state.data.train, c));
        const auto rules = model::extract_sample_rules(tables.back());
        pooled.insert(pooled.end(), rules.begin(), rules.end());
    }

    logic::Connector connector;
    if (settings.forced_connector) {
        connector = *settings.forced_connector;
    } else {
        connector = logic::select_connector(pooled, state.model.num_concepts(),
                                            settings.d_threshold,
                                            settings.e_threshold)
                        .chosen;
    }

    ClientUpdate update;
    update.client_id = state.client_id;
    update.class_rules = aggregate_local_rules(
        tables, connector, state.data.validation, state.client_id);
    update.connector_vote = connector;
    update.parameters = state.model.parameters();
    update.sample_count = static_cast<int>(state.data.train.size());

    std::vector<int> predictions(state.data.validation.size());
    for (size_t i = 0; i < state.data.validation.size(); ++i) {
        predictions[i] = state.model.predict(state.data.validation.concepts[i]);
    }
    update.local_model_accuracy =
        metrics::model_accuracy(predictions, state.data.validation.labels);
    return update;
}

}  // namespace lrxfl::fl
