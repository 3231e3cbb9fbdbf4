#include "federation.hpp"

#include <future>

namespace lrxfl::fl {

FederationResult run_federation(const data::FederatedPartition& partition,
                                const FederationConfig& config) {
    if (partition.clients.empty()) {
        throw InvalidInputError("federation requires at least one client");
    }
    if (config.rounds < 1) {
        throw InvalidInputError("federation requires at least one round");
    }
    const model::ConceptDataset& validation = partition.server_validation;
    const model::ConceptDataset& test = partition.server_test;
    const int num_classes = static_cast<int>(validation.class_names.size());
    const int num_concepts = static_cast<int>(validation.concept_names.size());
    const int K = static_cast<int>(partition.clients.size());

    RuleSettings rule_settings;
    rule_settings.d_threshold = config.d_threshold;
    rule_settings.e_threshold = config.e_threshold;
    rule_settings.forced_connector = config.forced_connector;

    std::vector<ClientState> clients;
    clients.reserve(K);
    for (int k = 0; k < K; ++k) {
        clients.push_back(ClientState{
            k,
            model::EntropyClassifier(num_classes, num_concepts,
                                     config.model_seed, config.model_options),
            partition.clients[k]});
    }

    model::EntropyClassifier global_model(num_classes, num_concepts,
                                          config.model_seed,
                                          config.model_options);
    std::vector<double> global_parameters = global_model.parameters();

    FederationResult result{{}, global_model};
    for (int round = 1; round <= config.rounds; ++round) {
        std::vector<ClientUpdate> updates(K);
        if (config.workers > 1) {
            // Client rounds are independent; results land at fixed indices
            // so the merge order never depends on scheduling.
            std::vector<std::future<ClientUpdate>> futures;
            futures.reserve(K);
            for (int k = 0; k < K; ++k) {
                futures.push_back(std::async(std::launch::async, [&, k] {
                    return local_round(clients[k], global_parameters,
                                       config.client_epochs, rule_settings);
                }));
            }
            for (int k = 0; k < K; ++k) updates[k] = futures[k].get();
        } else {
            for (int k = 0; k < K; ++k) {
                updates[k] = local_round(clients[k], global_parameters,
                                         config.client_epochs, rule_settings);
            }
        }

        const logic::Connector connector = config.forced_connector
                                               ? *config.forced_connector
                                               : vote_connector(updates);

        const double theta = config.apply_theta_filter ? config.theta : 0.0;
        const auto pools = filter_candidates(updates, theta, num_classes);
        const GlobalRuleSet rules =
            config.unconditional_union
                ? union_aggregate(pools, connector, validation)
                : beam_aggregate(pools, connector, validation,
                                 config.beam_width);

        std::vector<double> weights;
        if (config.uniform_weights) {
            weights.assign(K, 1.0 / K);
        } else {
            weights = compute_weights(rules, K);
        }
        global_parameters = aggregate_models(updates, weights);
        global_model.set_parameters(global_parameters);

        std::vector<std::optional<logic::ClassRule>> class_rules;
        for (const GlobalClassRule& entry : rules.per_class) {
            class_rules.push_back(entry.rule);
        }

        RoundRecord record;
        record.round = round;
        record.connector = connector;
        record.rules = rules;
        record.weights = weights;
        record.validation_metrics =
            metrics::evaluate(global_model, class_rules, validation);
        record.test_metrics = metrics::evaluate(global_model, class_rules, test);
        record.updates = std::move(updates);
        const double validation_rule_accuracy =
            record.validation_metrics.mean_rule_accuracy;
        result.rounds.push_back(std::move(record));

        if (check_stop(round, validation_rule_accuracy, config.target,
                       config.rounds)) {
            break;
        }
    }
    result.final_model = global_model;
    return result;
}

}  // namespace lrxfl::fl
