#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fl_client.hpp"
#include "logic.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace lrxfl::fl {

/// One clause offered for global aggregation. `owner` is the lowest client
/// id that produced it; `contributors` lists every client that did.
struct PoolCandidate {
    logic::ConjunctiveRule clause;
    int owner = 0;
    std::vector<int> contributors;

    PoolCandidate(logic::ConjunctiveRule clause, int owner,
                  std::vector<int> contributors)
        : clause(std::move(clause)),
          owner(owner),
          contributors(std::move(contributors)) {}
};

using CandidatePool = std::vector<PoolCandidate>;

/// Per-class fused rule plus bookkeeping used for weights and reporting.
struct GlobalClassRule {
    std::optional<logic::ClassRule> rule;
    double validation_accuracy = 0.0;
    std::vector<std::vector<int>> clause_contributors;  // parallel to clauses
};

struct GlobalRuleSet {
    std::vector<GlobalClassRule> per_class;
    logic::Connector global_connector = logic::Connector::And;
};

struct BeamStats {
    long long scored_states = 0;
};

/// Majority vote over client connector votes; an exact tie resolves to OR.
logic::Connector vote_connector(std::span<const ClientUpdate> updates);

/// Drops every rule from clients below the accuracy threshold, flattens the
/// survivors' class rules into clauses, and deduplicates identical clauses
/// (lowest client id wins ownership, all contributors are recorded).
std::vector<CandidatePool> filter_candidates(
    std::span<const ClientUpdate> updates, double theta, int num_classes);

/// Beam search over candidate subsets, scored by validation rule accuracy
/// of the fused rule. Ties prefer fewer clauses, then the lexicographically
/// smallest sorted owner list. AND-contradictory extensions are discarded.
GlobalRuleSet beam_aggregate(const std::vector<CandidatePool>& pools,
                             logic::Connector connector,
                             const model::ConceptDataset& validation,
                             int beam_width, BeamStats* stats = nullptr);

/// Every surviving candidate joined unconditionally (the FedAvg-Logic
/// selection rule).
GlobalRuleSet union_aggregate(const std::vector<CandidatePool>& pools,
                              logic::Connector connector,
                              const model::ConceptDataset& validation);

/// w_k proportional to the number of classes whose global rule contains a
/// clause owned by client k; uniform fallback when nobody was selected.
std::vector<double> compute_weights(const GlobalRuleSet& rules,
                                    int num_clients);

/// Elementwise weighted average of the client parameter snapshots.
std::vector<double> aggregate_models(std::span<const ClientUpdate> updates,
                                     std::span<const double> weights);

bool check_stop(int round_index, double mean_validation_rule_accuracy,
                double target, int max_rounds);

}  // namespace lrxfl::fl
