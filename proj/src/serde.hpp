#pragma once

#include <json.hpp>

#include "fl_client.hpp"
#include "logic.hpp"

// JSON wire forms for the values exchanged between client and server.

namespace lrxfl::serde {

nlohmann::json rule_to_json(const logic::ConjunctiveRule& rule);
logic::ConjunctiveRule rule_from_json(const nlohmann::json& j);

nlohmann::json class_rule_to_json(const logic::ClassRule& rule);
logic::ClassRule class_rule_from_json(const nlohmann::json& j);

nlohmann::json client_update_to_json(const fl::ClientUpdate& update);
fl::ClientUpdate client_update_from_json(const nlohmann::json& j);

}  // namespace lrxfl::serde
