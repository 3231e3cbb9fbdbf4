#include "fl_server.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lrxfl::fl {

logic::Connector vote_connector(std::span<const ClientUpdate> updates) {
    if (updates.empty()) {
        throw InvalidInputError("connector vote requires at least one update");
    }
    int or_votes = 0;
    for (const ClientUpdate& update : updates) {
        if (update.connector_vote == logic::Connector::Or) ++or_votes;
    }
    const int and_votes = static_cast<int>(updates.size()) - or_votes;
    // OR on ties: it cannot manufacture contradictions.
    return or_votes >= and_votes ? logic::Connector::Or : logic::Connector::And;
}

std::vector<CandidatePool> filter_candidates(
    std::span<const ClientUpdate> updates, double theta, int num_classes) {
    if (theta < 0.0 || theta > 1.0) {
        throw InvalidInputError("accuracy threshold must lie in [0, 1]");
    }
    std::vector<CandidatePool> pools(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        std::map<logic::ConjunctiveRule, std::set<int>> sources;
        for (const ClientUpdate& update : updates) {
            if (update.local_model_accuracy < theta) continue;
            if (c >= static_cast<int>(update.class_rules.size())) continue;
            const auto& rule = update.class_rules[c];
            if (!rule) continue;
            for (const logic::ConjunctiveRule& clause : rule->clauses) {
                sources[clause].insert(update.client_id);
            }
        }
        for (auto& [clause, clients] : sources) {
            pools[c].emplace_back(clause, *clients.begin(),
                                  std::vector<int>(clients.begin(), clients.end()));
        }
    }
    return pools;
}

namespace {

struct ScoredValidation {
    std::vector<int> class_positives;  // per class
    size_t size = 0;
};

// Subset of the pool under evaluation, with its cached satisfaction vector.
struct BeamState {
    std::vector<int> members;  // sorted candidate indices
    std::vector<bool> satisfied;
    double accuracy = 0.0;
    std::vector<int> owners;  // sorted owner ids, parallel sized to members
};

// Accuracy desc, fewer clauses, smallest sorted owner list, then smallest
// member list so every comparison is a strict total order.
bool beats(const BeamState& a, const BeamState& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.members.size() != b.members.size()) {
        return a.members.size() < b.members.size();
    }
    if (a.owners != b.owners) return a.owners < b.owners;
    return a.members < b.members;
}

double subset_accuracy(const std::vector<bool>& satisfied,
                       const model::ConceptDataset& validation, int class_id) {
    long long correct = 0;
    for (size_t i = 0; i < validation.size(); ++i) {
        const bool positive = validation.labels[i] == class_id;
        if (satisfied[i] == positive) ++correct;
    }
    return static_cast<double>(correct) /
           static_cast<double>(validation.size());
}

double absent_rule_accuracy(const model::ConceptDataset& validation,
                            int class_id) {
    long long negatives = 0;
    for (int label : validation.labels) {
        if (label != class_id) ++negatives;
    }
    return static_cast<double>(negatives) /
           static_cast<double>(validation.size());
}

GlobalClassRule emit_state(const BeamState& state, const CandidatePool& pool,
                           logic::Connector connector, int class_id) {
    std::vector<logic::ConjunctiveRule> clauses;
    std::vector<int> owners;
    std::set<int> all_contributors;
    for (int idx : state.members) {
        clauses.push_back(pool[idx].clause);
        owners.push_back(pool[idx].owner);
        all_contributors.insert(pool[idx].contributors.begin(),
                                pool[idx].contributors.end());
    }
    GlobalClassRule out;
    out.rule = logic::fuse_clauses(clauses, connector, class_id, owners);
    out.validation_accuracy = state.accuracy;
    if (connector == logic::Connector::And) {
        // One flattened clause; credit everyone who contributed a part.
        out.clause_contributors.push_back(
            std::vector<int>(all_contributors.begin(), all_contributors.end()));
    } else {
        // OR keeps clauses in canonical order; align contributor lists.
        std::vector<size_t> order(state.members.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return pool[state.members[a]].clause < pool[state.members[b]].clause;
        });
        for (size_t i : order) {
            out.clause_contributors.push_back(
                pool[state.members[i]].contributors);
        }
    }
    return out;
}

GlobalClassRule aggregate_one_class(const CandidatePool& pool,
                                    logic::Connector connector, int class_id,
                                    const model::ConceptDataset& validation,
                                    int beam_width, BeamStats* stats) {
    GlobalClassRule absent;
    absent.validation_accuracy = absent_rule_accuracy(validation, class_id);
    if (pool.empty()) return absent;

    const size_t V = validation.size();
    std::vector<std::vector<bool>> clause_sat(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        clause_sat[i].resize(V);
        for (size_t s = 0; s < V; ++s) {
            clause_sat[i][s] = pool[i].clause.evaluate(validation.concepts[s]);
        }
    }

    auto make_singleton = [&](int idx) {
        BeamState state;
        state.members = {idx};
        state.owners = {pool[idx].owner};
        state.satisfied = clause_sat[idx];
        state.accuracy = subset_accuracy(state.satisfied, validation, class_id);
        if (stats) stats->scored_states += 1;
        return state;
    };

    std::vector<BeamState> beam;
    for (size_t i = 0; i < pool.size(); ++i) {
        beam.push_back(make_singleton(static_cast<int>(i)));
    }
    std::sort(beam.begin(), beam.end(), beats);
    if (static_cast<int>(beam.size()) > beam_width) beam.resize(beam_width);

    BeamState best = beam.front();

    while (true) {
        std::vector<BeamState> frontier;
        std::set<std::vector<int>> seen;
        for (const BeamState& state : beam) {
            for (size_t cand = 0; cand < pool.size(); ++cand) {
                const int idx = static_cast<int>(cand);
                if (std::binary_search(state.members.begin(),
                                       state.members.end(), idx)) {
                    continue;
                }
                std::vector<int> members = state.members;
                members.insert(
                    std::upper_bound(members.begin(), members.end(), idx), idx);
                if (!seen.insert(members).second) continue;

                if (connector == logic::Connector::And) {
                    // Discard extensions that would contradict the fusion.
                    bool conflict = false;
                    for (int m : state.members) {
                        for (const logic::Literal& a : pool[m].clause.literals()) {
                            for (const logic::Literal& b :
                                 pool[idx].clause.literals()) {
                                if (a.concept_id == b.concept_id &&
                                    a.positive != b.positive) {
                                    conflict = true;
                                    break;
                                }
                            }
                            if (conflict) break;
                        }
                        if (conflict) break;
                    }
                    if (conflict) continue;
                }

                BeamState next;
                next.members = std::move(members);
                next.satisfied.resize(V);
                for (size_t s = 0; s < V; ++s) {
                    next.satisfied[s] =
                        connector == logic::Connector::And
                            ? (state.satisfied[s] && clause_sat[idx][s])
                            : (state.satisfied[s] || clause_sat[idx][s]);
                }
                next.accuracy =
                    subset_accuracy(next.satisfied, validation, class_id);
                next.owners = state.owners;
                next.owners.insert(std::upper_bound(next.owners.begin(),
                                                    next.owners.end(),
                                                    pool[idx].owner),
                                   pool[idx].owner);
                if (stats) stats->scored_states += 1;
                frontier.push_back(std::move(next));
            }
        }
        if (frontier.empty()) break;
        std::sort(frontier.begin(), frontier.end(), beats);
        if (static_cast<int>(frontier.size()) > beam_width) {
            frontier.resize(beam_width);
        }
        // Depth is bounded by the pool size, so the whole search scores at
        // most b * |pool|^2 states; the best state seen anywhere wins.
        if (beats(frontier.front(), best)) best = frontier.front();
        beam = std::move(frontier);
    }

    return emit_state(best, pool, connector, class_id);
}

}  // namespace

GlobalRuleSet beam_aggregate(const std::vector<CandidatePool>& pools,
                             logic::Connector connector,
                             const model::ConceptDataset& validation,
                             int beam_width, BeamStats* stats) {
    if (beam_width < 1) {
        throw InvalidInputError("beam width must be at least 1");
    }
    if (validation.size() == 0) {
        throw InvalidInputError(
            "global aggregation requires a nonempty validation set");
    }
    GlobalRuleSet out;
    out.global_connector = connector;
    for (size_t c = 0; c < pools.size(); ++c) {
        out.per_class.push_back(aggregate_one_class(pools[c], connector,
                                                    static_cast<int>(c),
                                                    validation, beam_width,
                                                    stats));
    }
    return out;
}

GlobalRuleSet union_aggregate(const std::vector<CandidatePool>& pools,
                              logic::Connector connector,
                              const model::ConceptDataset& validation) {
    if (validation.size() == 0) {
        throw InvalidInputError(
            "global aggregation requires a nonempty validation set");
    }
    GlobalRuleSet out;
    out.global_connector = connector;
    for (size_t c = 0; c < pools.size(); ++c) {
        const int class_id = static_cast<int>(c);
        GlobalClassRule entry;
        if (pools[c].empty()) {
            entry.validation_accuracy =
                absent_rule_accuracy(validation, class_id);
            out.per_class.push_back(std::move(entry));
            continue;
        }
        std::vector<logic::ConjunctiveRule> clauses;
        std::vector<int> owners;
        for (const PoolCandidate& cand : pools[c]) {
            clauses.push_back(cand.clause);
            owners.push_back(cand.owner);
        }
        entry.rule = logic::fuse_clauses(clauses, connector, class_id, owners);
        entry.validation_accuracy =
            metrics::rule_accuracy(entry.rule, validation, class_id).first;
        if (connector == logic::Connector::And) {
            std::set<int> all;
            for (const PoolCandidate& cand : pools[c]) {
                all.insert(cand.contributors.begin(), cand.contributors.end());
            }
            entry.clause_contributors.push_back(
                std::vector<int>(all.begin(), all.end()));
        } else {
            for (const PoolCandidate& cand : pools[c]) {
                entry.clause_contributors.push_back(cand.contributors);
            }
        }
        out.per_class.push_back(std::move(entry));
    }
    return out;
}

std::vector<double> compute_weights(const GlobalRuleSet& rules,
                                    int num_clients) {
    if (num_clients < 1) {
        throw InvalidInputError("weights require at least one client");
    }
    std::vector<long long> selected(num_clients, 0);
    for (const GlobalClassRule& entry : rules.per_class) {
        if (!entry.rule) continue;
        std::set<int> owners(entry.rule->clause_owner.begin(),
                             entry.rule->clause_owner.end());
        for (int owner : owners) {
            if (owner >= 0 && owner < num_clients) selected[owner] += 1;
        }
    }
    long long total = 0;
    for (long long s : selected) total += s;

    std::vector<double> weights(num_clients);
    if (total == 0) {
        // Nobody contributed; the round still needs a global model.
        std::fill(weights.begin(), weights.end(), 1.0 / num_clients);
    } else {
        for (int k = 0; k < num_clients; ++k) {
            weights[k] = static_cast<double>(selected[k]) /
                         static_cast<double>(total);
        }
    }
    return weights;
}

std::vector<double> aggregate_models(std::span<const ClientUpdate> updates,
                                     std::span<const double> weights) {
    if (updates.empty() || updates.size() != weights.size()) {
        throw InvalidInputError(
            "model aggregation needs one weight per client update");
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidInputError("aggregation weights must sum to 1");
    }
    const size_t dim = updates.front().parameters.size();
    for (const ClientUpdate& update : updates) {
        if (update.parameters.size() != dim) {
            throw InvalidInputError(
                "client " + std::to_string(update.client_id) +
                " sent a parameter snapshot of mismatched shape");
        }
    }
    std::vector<double> out(dim, 0.0);
    for (size_t k = 0; k < updates.size(); ++k) {
        const auto& params = updates[k].parameters;
        for (size_t i = 0; i < dim; ++i) {
            out[i] += weights[k] * params[i];
        }
    }
    return out;
}

bool check_stop(int round_index, double mean_validation_rule_accuracy,
                double target, int max_rounds) {
    return round_index >= max_rounds ||
           mean_validation_rule_accuracy >= target;
}

}  // namespace lrxfl::fl
