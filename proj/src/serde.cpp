#include "serde.hpp"

namespace lrxfl::serde {

using nlohmann::json;

json rule_to_json(const logic::ConjunctiveRule& rule) {
    json literals = json::array();
    for (const logic::Literal& lit : rule.literals()) {
        literals.push_back(json::array({lit.concept_id, lit.positive}));
    }
    return literals;
}

logic::ConjunctiveRule rule_from_json(const json& j) {
    std::vector<logic::Literal> literals;
    for (const json& entry : j) {
        literals.push_back({entry.at(0).get<int>(), entry.at(1).get<bool>()});
    }
    return logic::ConjunctiveRule(std::move(literals));
}

json class_rule_to_json(const logic::ClassRule& rule) {
    json j;
    j["class_id"] = rule.class_id;
    j["connector"] = std::string(logic::connector_name(rule.connector));
    j["clauses"] = json::array();
    for (const logic::ConjunctiveRule& clause : rule.clauses) {
        j["clauses"].push_back(rule_to_json(clause));
    }
    if (!rule.clause_owner.empty()) {
        j["owners"] = rule.clause_owner;
    }
    return j;
}

logic::ClassRule class_rule_from_json(const json& j) {
    std::vector<logic::ConjunctiveRule> clauses;
    for (const json& clause : j.at("clauses")) {
        clauses.push_back(rule_from_json(clause));
    }
    std::vector<int> owners;
    if (j.contains("owners")) {
        owners = j.at("owners").get<std::vector<int>>();
    }
    return logic::ClassRule::make(
        j.at("class_id").get<int>(),
        logic::connector_from_name(j.at("connector").get<std::string>()),
        std::move(clauses), std::move(owners));
}

json client_update_to_json(const fl::ClientUpdate& update) {
    json j;
    j["client_id"] = update.client_id;
    j["parameters"] = update.parameters;
    j["class_rules"] = json::array();
    for (const auto& rule : update.class_rules) {
        j["class_rules"].push_back(rule ? class_rule_to_json(*rule)
                                        : json(nullptr));
    }
    j["connector_vote"] =
        std::string(logic::connector_name(update.connector_vote));
    j["local_model_accuracy"] = update.local_model_accuracy;
    j["sample_count"] = update.sample_count;
    return j;
}

fl::ClientUpdate client_update_from_json(const json& j) {
    fl::ClientUpdate update;
    update.client_id = j.at("client_id").get<int>();
    update.parameters = j.at("parameters").get<std::vector<double>>();
    for (const json& rule : j.at("class_rules")) {
        if (rule.is_null()) {
            update.class_rules.push_back(std::nullopt);
        } else {
            update.class_rules.push_back(class_rule_from_json(rule));
        }
    }
    update.connector_vote =
        logic::connector_from_name(j.at("connector_vote").get<std::string>());
    update.local_model_accuracy = j.at("local_model_accuracy").get<double>();
    update.sample_count = j.at("sample_count").get<int>();
    return update;
}

}  // namespace lrxfl::serde
