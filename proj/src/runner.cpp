#include "runner.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metrics.hpp"

namespace lrxfl::runner {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string joined(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void ensure_object(const json& value, const std::string& field) {
    if (!value.is_object()) {
        throw SchemaError(field, "field '" + field + "' must be an object");
    }
}

void ensure_known_keys(const json& obj, const std::string& prefix,
                       std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        const bool known =
            std::any_of(allowed.begin(), allowed.end(),
                        [&](const char* k) { return item.key() == k; });
        if (!known) {
            throw SchemaError(joined(prefix, item.key()),
                              "unknown field '" + joined(prefix, item.key()) +
                                  "'");
        }
    }
}

int get_int(const json& obj, const std::string& prefix, const char* key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw SchemaError(joined(prefix, key),
                          "field '" + joined(prefix, key) +
                              "' must be an integer");
    }
    return v.get<int>();
}

uint64_t get_seed(const json& obj, const std::string& prefix, const char* key,
                  uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw SchemaError(joined(prefix, key),
                          "field '" + joined(prefix, key) +
                              "' must be an integer seed");
    }
    return v.get<uint64_t>();
}

double get_double(const json& obj, const std::string& prefix, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw SchemaError(joined(prefix, key),
                          "field '" + joined(prefix, key) +
                              "' must be a number");
    }
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& prefix,
                       const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw SchemaError(joined(prefix, key),
                          "field '" + joined(prefix, key) +
                              "' must be a string");
    }
    return v.get<std::string>();
}

void check_range(double value, double low, double high,
                 const std::string& field) {
    if (value < low || value > high) {
        throw SchemaError(field, "field '" + field + "' must lie in [" +
                                     std::to_string(low) + ", " +
                                     std::to_string(high) + "]");
    }
}

const std::vector<std::string> kMethods = {"lr-xfl", "fedavg-logic", "ddt",
                                           "centralised", "ablated"};

void check_method(const std::string& method) {
    if (std::find(kMethods.begin(), kMethods.end(), method) ==
        kMethods.end()) {
        std::string names;
        for (const std::string& m : kMethods) {
            if (!names.empty()) names += ", ";
            names += m;
        }
        throw SchemaError("method", "unknown method '" + method +
                                        "'; expected one of: " + names);
    }
}

}  // namespace

Config Config::from_json(const json& raw) {
    ensure_object(raw, "config");
    ensure_known_keys(raw, "", {"dataset", "federation", "rules", "model",
                                "noise", "method", "output_dir"});
    Config config;

    if (!raw.contains("dataset")) {
        throw SchemaError("dataset", "field 'dataset' is required");
    }
    const json& ds = raw.at("dataset");
    ensure_object(ds, "dataset");
    ensure_known_keys(ds, "dataset",
                      {"name", "samples", "seed", "flip_noise", "concepts",
                       "class_specs", "csv", "label_column", "thresholds",
                       "default_threshold"});
    config.dataset.name = get_string(ds, "dataset", "name", "");
    if (config.dataset.name != "parity" && config.dataset.name != "conjunctive" &&
        config.dataset.name != "csv") {
        throw SchemaError("dataset.name",
                          "field 'dataset.name' must be one of: parity, "
                          "conjunctive, csv");
    }
    config.dataset.samples = get_int(ds, "dataset", "samples", 2000);
    if (config.dataset.samples < 1) {
        throw SchemaError("dataset.samples",
                          "field 'dataset.samples' must be positive");
    }
    config.dataset.seed = get_seed(ds, "dataset", "seed", 7);
    config.dataset.flip_noise = get_double(ds, "dataset", "flip_noise", 0.0);
    check_range(config.dataset.flip_noise, 0.0, 1.0, "dataset.flip_noise");

    if (ds.contains("concepts")) {
        const json& names = ds.at("concepts");
        if (!names.is_array()) {
            throw SchemaError("dataset.concepts",
                              "field 'dataset.concepts' must be an array of "
                              "strings");
        }
        for (const json& name : names) {
            if (!name.is_string()) {
                throw SchemaError("dataset.concepts",
                                  "field 'dataset.concepts' must contain only "
                                  "strings");
            }
            config.dataset.concepts.push_back(name.get<std::string>());
        }
    }
    if (ds.contains("class_specs")) {
        const json& specs = ds.at("class_specs");
        if (!specs.is_array()) {
            throw SchemaError("dataset.class_specs",
                              "field 'dataset.class_specs' must be an array");
        }
        for (const json& spec : specs) {
            if (!spec.is_object() || !spec.contains("class") ||
                !spec.contains("concepts") || !spec.at("class").is_string() ||
                !spec.at("concepts").is_array()) {
                throw SchemaError(
                    "dataset.class_specs",
                    "each class spec needs a 'class' string and a 'concepts' "
                    "array of literal tokens");
            }
            std::vector<std::string> tokens;
            for (const json& token : spec.at("concepts")) {
                if (!token.is_string()) {
                    throw SchemaError("dataset.class_specs",
                                      "class spec concept tokens must be "
                                      "strings");
                }
                tokens.push_back(token.get<std::string>());
            }
            config.dataset.class_specs.emplace_back(
                spec.at("class").get<std::string>(), std::move(tokens));
        }
    }
    config.dataset.csv_path = get_string(ds, "dataset", "csv", "");
    config.dataset.label_column =
        get_string(ds, "dataset", "label_column", "label");
    if (ds.contains("thresholds")) {
        const json& thresholds = ds.at("thresholds");
        ensure_object(thresholds, "dataset.thresholds");
        for (const auto& item : thresholds.items()) {
            if (!item.value().is_number()) {
                throw SchemaError("dataset.thresholds",
                                  "threshold for column '" + item.key() +
                                      "' must be a number");
            }
            config.dataset.thresholds[item.key()] = item.value().get<double>();
        }
    }
    config.dataset.default_threshold =
        get_double(ds, "dataset", "default_threshold", 0.5);

    if (config.dataset.name == "conjunctive") {
        if (config.dataset.concepts.empty()) {
            throw SchemaError("dataset.concepts",
                              "'dataset.concepts' is required for the "
                              "conjunctive dataset");
        }
        if (config.dataset.class_specs.empty()) {
            throw SchemaError("dataset.class_specs",
                              "'dataset.class_specs' is required for the "
                              "conjunctive dataset");
        }
    }
    if (config.dataset.name == "csv" && config.dataset.csv_path.empty()) {
        throw SchemaError("dataset.csv",
                          "'dataset.csv' is required for the csv dataset");
    }

    if (raw.contains("federation")) {
        const json& fed = raw.at("federation");
        ensure_object(fed, "federation");
        ensure_known_keys(fed, "federation",
                          {"clients", "rounds", "target", "client_epochs"});
        config.clients = get_int(fed, "federation", "clients", 10);
        config.rounds = get_int(fed, "federation", "rounds", 10);
        config.target = get_double(fed, "federation", "target", 0.95);
        config.client_epochs = get_int(fed, "federation", "client_epochs", 200);
        if (config.clients < 1) {
            throw SchemaError("federation.clients",
                              "field 'federation.clients' must be positive");
        }
        if (config.rounds < 1) {
            throw SchemaError("federation.rounds",
                              "field 'federation.rounds' must be positive");
        }
        check_range(config.target, 0.0, 1.0, "federation.target");
        if (config.client_epochs < 0) {
            throw SchemaError(
                "federation.client_epochs",
                "field 'federation.client_epochs' must be nonnegative");
        }
    }

    if (raw.contains("rules")) {
        const json& rules = raw.at("rules");
        ensure_object(rules, "rules");
        ensure_known_keys(rules, "rules",
                          {"d_threshold", "e_threshold", "theta", "beam_width",
                           "tau", "forced_connector", "ddt_depth"});
        config.d_threshold = get_double(rules, "rules", "d_threshold",
                                        logic::kDefaultDiagonalityThreshold);
        config.e_threshold = get_double(rules, "rules", "e_threshold",
                                        logic::kDefaultExclusivityThreshold);
        config.theta = get_double(rules, "rules", "theta", 0.7);
        config.beam_width = get_int(rules, "rules", "beam_width", 8);
        config.tau = get_double(rules, "rules", "tau", 0.5);
        config.ddt_depth = get_int(rules, "rules", "ddt_depth",
                                   baselines::kDefaultTreeDepth);
        check_range(config.d_threshold, 0.0, 1.0, "rules.d_threshold");
        check_range(config.e_threshold, 0.0, 1.0, "rules.e_threshold");
        check_range(config.theta, 0.0, 1.0, "rules.theta");
        if (config.beam_width < 1) {
            throw SchemaError("rules.beam_width",
                              "field 'rules.beam_width' must be positive");
        }
        if (!(config.tau > 0.0 && config.tau <= 1.0)) {
            throw SchemaError("rules.tau",
                              "field 'rules.tau' must lie in (0, 1]");
        }
        if (config.ddt_depth < 1) {
            throw SchemaError("rules.ddt_depth",
                              "field 'rules.ddt_depth' must be positive");
        }
        if (rules.contains("forced_connector")) {
            const std::string name =
                get_string(rules, "rules", "forced_connector", "");
            if (name != "AND" && name != "OR") {
                throw SchemaError("rules.forced_connector",
                                  "field 'rules.forced_connector' must be "
                                  "'AND' or 'OR'");
            }
            config.forced_connector = logic::connector_from_name(name);
        }
    }

    if (raw.contains("model")) {
        const json& model = raw.at("model");
        ensure_object(model, "model");
        ensure_known_keys(
            model, "model",
            {"temperature", "entropy_coeff", "learning_rate", "epochs"});
        config.temperature = get_double(model, "model", "temperature", 5.0);
        config.entropy_coeff =
            get_double(model, "model", "entropy_coeff", 0.01);
        config.learning_rate =
            get_double(model, "model", "learning_rate", 2.0);
        config.model_epochs = get_int(model, "model", "epochs", 200);
        if (config.temperature <= 0.0) {
            throw SchemaError("model.temperature",
                              "field 'model.temperature' must be positive");
        }
        if (config.entropy_coeff < 0.0) {
            throw SchemaError(
                "model.entropy_coeff",
                "field 'model.entropy_coeff' must be nonnegative");
        }
        if (config.learning_rate < 0.0) {
            throw SchemaError("model.learning_rate",
                              "field 'model.learning_rate' must be "
                              "nonnegative");
        }
        if (config.model_epochs < 0) {
            throw SchemaError("model.epochs",
                              "field 'model.epochs' must be nonnegative");
        }
    }

    if (raw.contains("noise")) {
        const json& noise = raw.at("noise");
        ensure_object(noise, "noise");
        ensure_known_keys(noise, "noise", {"t", "s", "seed"});
        config.noise_t = get_double(noise, "noise", "t", 0.0);
        config.noise_s = get_double(noise, "noise", "s", 1.0);
        config.noise_seed = get_seed(noise, "noise", "seed", 0);
        check_range(config.noise_t, 0.0, 1.0, "noise.t");
        check_range(config.noise_s, 0.0, 1.0, "noise.s");
    }

    if (!raw.contains("method")) {
        throw SchemaError("method", "field 'method' is required");
    }
    const json& method = raw.at("method");
    if (method.is_string()) {
        config.methods = {method.get<std::string>()};
    } else if (method.is_array()) {
        for (const json& m : method) {
            if (!m.is_string()) {
                throw SchemaError("method",
                                  "field 'method' must be a method name or an "
                                  "array of method names");
            }
            config.methods.push_back(m.get<std::string>());
        }
        if (config.methods.empty()) {
            throw SchemaError("method", "field 'method' must not be empty");
        }
    } else {
        throw SchemaError("method",
                          "field 'method' must be a method name or an array "
                          "of method names");
    }
    for (const std::string& m : config.methods) check_method(m);

    const bool wants_ablated =
        std::find(config.methods.begin(), config.methods.end(), "ablated") !=
        config.methods.end();
    if (wants_ablated && !config.forced_connector) {
        throw SchemaError("rules.forced_connector",
                          "'rules.forced_connector' is required when method "
                          "'ablated' is selected");
    }

    config.output_dir = get_string(raw, "", "output_dir", "out");
    return config;
}

ordered_json Config::echo() const {
    ordered_json out;
    ordered_json ds;
    ds["name"] = dataset.name;
    if (dataset.name == "csv") {
        ds["csv"] = dataset.csv_path;
        ds["label_column"] = dataset.label_column;
        ordered_json thresholds = ordered_json::object();
        for (const auto& [column, value] : dataset.thresholds) {
            thresholds[column] = value;
        }
        ds["thresholds"] = thresholds;
        ds["default_threshold"] = dataset.default_threshold;
        ds["seed"] = dataset.seed;
    } else {
        ds["samples"] = dataset.samples;
        ds["seed"] = dataset.seed;
        if (dataset.name == "conjunctive") {
            ds["flip_noise"] = dataset.flip_noise;
            ds["concepts"] = dataset.concepts;
            ordered_json specs = ordered_json::array();
            for (const auto& [class_name, tokens] : dataset.class_specs) {
                ordered_json spec;
                spec["class"] = class_name;
                spec["concepts"] = tokens;
                specs.push_back(spec);
            }
            ds["class_specs"] = specs;
        }
    }
    out["dataset"] = ds;

    out["federation"] = {{"clients", clients},
                         {"rounds", rounds},
                         {"target", target},
                         {"client_epochs", client_epochs}};

    ordered_json rules;
    rules["d_threshold"] = d_threshold;
    rules["e_threshold"] = e_threshold;
    rules["theta"] = theta;
    rules["beam_width"] = beam_width;
    rules["tau"] = tau;
    if (forced_connector) {
        rules["forced_connector"] =
            std::string(logic::connector_name(*forced_connector));
    }
    rules["ddt_depth"] = ddt_depth;
    out["rules"] = rules;

    out["model"] = {{"temperature", temperature},
                    {"entropy_coeff", entropy_coeff},
                    {"learning_rate", learning_rate},
                    {"epochs", model_epochs}};
    out["noise"] = {{"t", noise_t}, {"s", noise_s}, {"seed", noise_seed}};
    if (methods.size() == 1) {
        out["method"] = methods.front();
    } else {
        out["method"] = methods;
    }
    out["output_dir"] = output_dir;
    return out;
}

model::ClassifierOptions Config::classifier_options() const {
    model::ClassifierOptions options;
    options.temperature = temperature;
    options.entropy_coeff = entropy_coeff;
    options.mask_fraction = tau;
    options.learning_rate = learning_rate;
    options.epochs = model_epochs;
    return options;
}

fl::FederationConfig Config::federation_config(int workers) const {
    fl::FederationConfig fed;
    fed.rounds = rounds;
    fed.target = target;
    fed.client_epochs = client_epochs;
    fed.d_threshold = d_threshold;
    fed.e_threshold = e_threshold;
    fed.theta = theta;
    fed.beam_width = beam_width;
    fed.model_seed = dataset.seed;
    fed.model_options = classifier_options();
    fed.workers = workers;
    return fed;
}

Config parse_config_text(const std::string& text) {
    json raw;
    try {
        raw = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError(std::string("config is not valid JSON: ") +
                         err.what());
    }
    return Config::from_json(raw);
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void apply_override(json& raw, const std::string& dotted_key,
                    const std::string& value) {
    if (dotted_key.empty()) {
        throw InvalidInputError("override key must not be empty");
    }
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;  // plain string value
    }

    json* node = &raw;
    size_t start = 0;
    while (true) {
        const size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw InvalidInputError("override key '" + dotted_key +
                                    "' has an empty segment");
        }
        if (dot == std::string::npos) {
            (*node)[part] = parsed;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) {
            (*node)[part] = json::object();
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

model::ConceptDataset build_dataset(const DatasetConfig& config) {
    if (config.name == "parity") {
        return data::gen_parity(config.samples, config.seed);
    }
    if (config.name == "conjunctive") {
        std::vector<data::ClassSpec> specs;
        for (const auto& [class_name, tokens] : config.class_specs) {
            data::ClassSpec spec;
            spec.class_name = class_name;
            for (const std::string& token : tokens) {
                logic::Literal lit;
                std::string name = token;
                if (!name.empty() && name.front() == '~') {
                    lit.positive = false;
                    name = name.substr(1);
                }
                const auto it = std::find(config.concepts.begin(),
                                          config.concepts.end(), name);
                if (it == config.concepts.end()) {
                    throw SchemaError("dataset.class_specs",
                                      "class spec for '" + class_name +
                                          "' references unknown concept '" +
                                          name + "'");
                }
                lit.concept_id =
                    static_cast<int>(it - config.concepts.begin());
                spec.defining.push_back(lit);
            }
            specs.push_back(std::move(spec));
        }
        return data::gen_conjunctive(config.samples, specs, config.concepts,
                                     config.flip_noise, config.seed);
    }
    if (config.name == "csv") {
        return data::load_csv(config.csv_path, config.label_column,
                              config.thresholds, config.default_threshold);
    }
    throw SchemaError("dataset.name",
                      "unknown dataset '" + config.name + "'");
}

Prepared prepare(const Config& config) {
    Prepared prep;
    prep.dataset = build_dataset(config.dataset);

    data::PartitionPlan plan;
    plan.num_clients = config.clients;
    plan.seed = config.dataset.seed;
    prep.partition = data::partition(prep.dataset, plan);

    data::NoiseSpec noise;
    noise.client_fraction = config.noise_t;
    noise.data_fraction = config.noise_s;
    noise.seed = config.noise_seed;
    prep.noisy_clients = data::inject_noise(prep.partition.clients, noise);
    return prep;
}

std::string format_fraction(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", value * 100.0);
    return buf;
}

uint64_t fnv1a_hash(const std::string& text) {
    uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

namespace {

std::string hash_hex(uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(value));
    return buf;
}

std::string fmt_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

ordered_json metrics_to_json(const metrics::MetricsReport& report) {
    ordered_json out;
    out["model_accuracy"] = report.model_accuracy;
    out["rule_accuracy"] = report.mean_rule_accuracy;
    out["rule_fidelity"] = report.mean_rule_fidelity;
    ordered_json per_class_acc = ordered_json::array();
    ordered_json per_class_fid = ordered_json::array();
    for (const auto& acc : report.per_class_rule_accuracy) {
        per_class_acc.push_back(acc ? ordered_json(*acc)
                                    : ordered_json(nullptr));
    }
    for (const auto& fid : report.per_class_rule_fidelity) {
        per_class_fid.push_back(fid ? ordered_json(*fid)
                                    : ordered_json(nullptr));
    }
    out["per_class_rule_accuracy"] = per_class_acc;
    out["per_class_rule_fidelity"] = per_class_fid;
    out["classes_without_rule"] = report.classes_without_rule;
    return out;
}

ordered_json rule_entry_json(const fl::GlobalClassRule& entry,
                             const std::string& class_name,
                             const model::ConceptDataset& vocab) {
    ordered_json out;
    out["class"] = class_name;
    if (entry.rule) {
        out["rule"] = logic::to_text(*entry.rule, vocab.concept_names,
                                     vocab.class_names);
        out["owners"] = entry.rule->clause_owner;
        out["contributors"] = entry.clause_contributors;
    } else {
        out["rule"] = nullptr;
        out["owners"] = ordered_json::array();
        out["contributors"] = ordered_json::array();
    }
    out["validation_accuracy"] = entry.validation_accuracy;
    return out;
}

struct MethodOutput {
    ordered_json rounds = ordered_json::array();
    ordered_json final;
    std::vector<std::vector<double>> weight_rows;  // parallel to csv rows
    std::vector<metrics::MetricsReport> test_rows;
};

MethodOutput federated_output(const fl::FederationResult& result,
                              const model::ConceptDataset& vocab,
                              const model::ConceptDataset& server_test) {
    MethodOutput out;
    for (const fl::RoundRecord& record : result.rounds) {
        ordered_json round;
        round["round"] = record.round;
        round["connector"] =
            std::string(logic::connector_name(record.connector));
        round["weights"] = record.weights;
        round["validation"] = metrics_to_json(record.validation_metrics);
        round["test"] = metrics_to_json(record.test_metrics);
        ordered_json classes = ordered_json::array();
        for (size_t c = 0; c < record.rules.per_class.size(); ++c) {
            classes.push_back(rule_entry_json(record.rules.per_class[c],
                                              vocab.class_names[c], vocab));
        }
        round["classes"] = classes;
        out.rounds.push_back(std::move(round));
        out.weight_rows.push_back(record.weights);
        out.test_rows.push_back(record.test_metrics);
    }

    const fl::RoundRecord& last = result.rounds.back();
    ordered_json final;
    final["connector"] = std::string(logic::connector_name(last.connector));
    final["weights"] = last.weights;
    final["test"] = metrics_to_json(last.test_metrics);
    ordered_json classes = ordered_json::array();
    for (size_t c = 0; c < last.rules.per_class.size(); ++c) {
        ordered_json entry = rule_entry_json(last.rules.per_class[c],
                                             vocab.class_names[c], vocab);
        const auto& acc = last.test_metrics.per_class_rule_accuracy[c];
        const auto& fid = last.test_metrics.per_class_rule_fidelity[c];
        entry["test_accuracy"] =
            acc ? ordered_json(*acc) : ordered_json(nullptr);
        entry["test_fidelity"] =
            fid ? ordered_json(*fid) : ordered_json(nullptr);
        classes.push_back(std::move(entry));
    }
    final["classes"] = classes;

    ordered_json client_rules = ordered_json::array();
    for (const fl::ClientUpdate& update : last.updates) {
        ordered_json client;
        client["client"] = update.client_id;
        client["connector_vote"] =
            std::string(logic::connector_name(update.connector_vote));
        client["local_model_accuracy"] = update.local_model_accuracy;
        ordered_json rules = ordered_json::array();
        for (size_t c = 0; c < update.class_rules.size(); ++c) {
            ordered_json entry;
            entry["class"] = vocab.class_names[c];
            if (update.class_rules[c]) {
                entry["rule"] =
                    logic::to_text(*update.class_rules[c],
                                   vocab.concept_names, vocab.class_names);
                entry["test_accuracy"] =
                    metrics::rule_accuracy(update.class_rules[c], server_test,
                                           static_cast<int>(c))
                        .first;
            } else {
                entry["rule"] = nullptr;
                entry["test_accuracy"] = nullptr;
            }
            rules.push_back(std::move(entry));
        }
        client["rules"] = rules;
        client_rules.push_back(std::move(client));
    }
    final["client_rules"] = client_rules;
    out.final = std::move(final);
    return out;
}

ordered_json plain_rules_json(
    const std::vector<std::optional<logic::ClassRule>>& rules,
    const metrics::MetricsReport& report, const model::ConceptDataset& vocab) {
    ordered_json classes = ordered_json::array();
    for (size_t c = 0; c < rules.size(); ++c) {
        ordered_json entry;
        entry["class"] = vocab.class_names[c];
        entry["rule"] = rules[c]
                            ? ordered_json(logic::to_text(*rules[c],
                                                          vocab.concept_names,
                                                          vocab.class_names))
                            : ordered_json(nullptr);
        const auto& acc = report.per_class_rule_accuracy[c];
        const auto& fid = report.per_class_rule_fidelity[c];
        entry["test_accuracy"] =
            acc ? ordered_json(*acc) : ordered_json(nullptr);
        entry["test_fidelity"] =
            fid ? ordered_json(*fid) : ordered_json(nullptr);
        classes.push_back(std::move(entry));
    }
    return classes;
}

std::string build_metrics_csv(const MethodOutput& output, int num_clients) {
    std::string csv = "round,model_accuracy,rule_accuracy,rule_fidelity";
    const bool with_weights =
        !output.weight_rows.empty() && !output.weight_rows.front().empty();
    if (with_weights) {
        for (int k = 0; k < num_clients; ++k) {
            csv += ",w_" + std::to_string(k);
        }
    }
    csv += "\n";
    for (size_t i = 0; i < output.test_rows.size(); ++i) {
        const metrics::MetricsReport& report = output.test_rows[i];
        csv += std::to_string(i + 1) + "," + fmt_double(report.model_accuracy) +
               "," + fmt_double(report.mean_rule_accuracy) + "," +
               fmt_double(report.mean_rule_fidelity);
        if (with_weights) {
            for (double w : output.weight_rows[i]) {
                csv += "," + fmt_double(w);
            }
        }
        csv += "\n";
    }
    return csv;
}

}  // namespace

std::string inspect_rules(const json& results, const std::string& class_filter) {
    std::string report;
    report += "# method: " + results.at("method").get<std::string>() + "\n";
    const json& final = results.at("final");
    if (final.contains("connector")) {
        report += "# connector: " + final.at("connector").get<std::string>() +
                  "\n";
    }
    if (final.contains("selected_client")) {
        report += "# selected client: " +
                  std::to_string(final.at("selected_client").get<int>()) + "\n";
    }

    const json& classes = final.at("classes");
    for (const json& entry : classes) {
        const std::string class_name = entry.at("class").get<std::string>();
        if (!class_filter.empty() && class_name != class_filter) continue;
        report += "# class: " + class_name + "\n";

        std::string line = "global\t";
        line += entry.at("rule").is_null()
                    ? "-"
                    : entry.at("rule").get<std::string>();
        if (entry.contains("test_accuracy") &&
            !entry.at("test_accuracy").is_null()) {
            line += "\taccuracy=" +
                    format_fraction(entry.at("test_accuracy").get<double>());
        }
        if (entry.contains("test_fidelity") &&
            !entry.at("test_fidelity").is_null()) {
            line += "\tfidelity=" +
                    format_fraction(entry.at("test_fidelity").get<double>());
        }
        if (entry.contains("contributors") &&
            !entry.at("contributors").empty()) {
            std::string joined_ids;
            for (const json& group : entry.at("contributors")) {
                for (const json& id : group) {
                    if (!joined_ids.empty()) joined_ids += ",";
                    joined_ids += std::to_string(id.get<int>());
                }
            }
            line += "\tclients=" + joined_ids;
        }
        report += line + "\n";

        if (final.contains("client_rules")) {
            for (const json& client : final.at("client_rules")) {
                std::string client_line =
                    "client " + std::to_string(client.at("client").get<int>()) +
                    "\t";
                const json* rule = nullptr;
                for (const json& r : client.at("rules")) {
                    if (r.at("class").get<std::string>() == class_name) {
                        rule = &r;
                        break;
                    }
                }
                if (rule == nullptr || rule->at("rule").is_null()) {
                    client_line += "-";
                } else {
                    client_line += rule->at("rule").get<std::string>();
                    client_line +=
                        "\taccuracy=" +
                        format_fraction(
                            rule->at("test_accuracy").get<double>());
                }
                report += client_line + "\n";
            }
        }
    }
    return report;
}

std::string inspect_rules_file(const std::string& results_path,
                               const std::string& class_filter) {
    std::ifstream in(results_path);
    if (!in) {
        throw IoError("cannot open results '" + results_path + "'");
    }
    json results;
    try {
        in >> results;
    } catch (const json::parse_error& err) {
        throw ParseError("'" + results_path +
                         "' is not a valid results document: " + err.what());
    }
    return inspect_rules(results, class_filter);
}

RunArtifacts run(const Config& config, int workers) {
    if (config.methods.size() != 1) {
        throw SchemaError("method",
                          "'run' needs exactly one method; use the noise "
                          "sweep for method lists");
    }
    const std::string& method = config.methods.front();
    Prepared prep = prepare(config);
    const model::ConceptDataset& vocab = prep.dataset;

    ordered_json results;
    results["schema"] = "lrxfl-results-v1";
    results["method"] = method;
    results["seed"] = config.dataset.seed;
    results["config"] = config.echo();
    results["config_hash"] =
        hash_hex(fnv1a_hash(results["config"].dump()));
    results["classes"] = vocab.class_names;
    results["concepts"] = vocab.concept_names;
    results["noisy_clients"] = prep.noisy_clients;

    MethodOutput output;
    if (method == "lr-xfl" || method == "fedavg-logic" || method == "ablated") {
        fl::FederationConfig fed = config.federation_config(workers);
        fl::FederationResult result =
            method == "lr-xfl"
                ? fl::run_federation(prep.partition, fed)
                : (method == "fedavg-logic"
                       ? baselines::run_fedavg_logic(prep.partition, fed)
                       : baselines::run_ablated(prep.partition, fed,
                                                *config.forced_connector));
        output = federated_output(result, vocab, prep.partition.server_test);
        if (method == "ablated") {
            output.final["forced_connector"] = std::string(
                logic::connector_name(*config.forced_connector));
        }
    } else if (method == "centralised") {
        baselines::CentralisedResult result = baselines::run_centralised(
            prep.partition, config.dataset.seed, config.classifier_options());
        ordered_json final;
        final["test"] = metrics_to_json(result.report);
        final["classes"] = plain_rules_json(result.rules, result.report, vocab);
        output.final = std::move(final);
        output.test_rows.push_back(result.report);
        output.weight_rows.emplace_back();
    } else if (method == "ddt") {
        baselines::DdtResult result =
            baselines::run_ddt(prep.partition, config.ddt_depth);
        ordered_json final;
        final["selected_client"] = result.selected_client;
        final["test"] = metrics_to_json(result.report);
        final["classes"] = plain_rules_json(result.rules, result.report, vocab);
        output.final = std::move(final);
        output.test_rows.push_back(result.report);
        output.weight_rows.emplace_back();
    } else {
        throw SchemaError("method", "unknown method '" + method + "'");
    }

    results["rounds"] = output.rounds;
    results["final"] = output.final;

    RunArtifacts artifacts;
    artifacts.metrics_csv = build_metrics_csv(output, config.clients);
    artifacts.rule_report = inspect_rules(results, "");
    artifacts.results = std::move(results);
    return artifacts;
}

void write_bundle(const RunArtifacts& artifacts,
                  const std::string& output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + output_dir +
                      "': " + ec.message());
    }
    auto write_file = [&](const std::string& name, const std::string& body) {
        const std::string path = output_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot open '" + path + "' for writing");
        }
        out << body;
        if (!out) {
            throw IoError("failed while writing '" + path + "'");
        }
    };

    write_file("results.json", artifacts.results.dump(2) + "\n");
    write_file("metrics.csv", artifacts.metrics_csv);
    write_file("rules.txt", artifacts.rule_report);

    ordered_json manifest;
    manifest["config_hash"] = artifacts.results.at("config_hash");
    manifest["files"] =
        std::vector<std::string>{"metrics.csv", "results.json", "rules.txt"};
    write_file("manifest.json", manifest.dump(2) + "\n");
}

SweepArtifacts sweep_noise(const Config& config,
                           const std::vector<double>& levels, int workers) {
    if (config.methods.empty()) {
        throw SchemaError("method", "sweep requires at least one method");
    }
    for (double level : levels) {
        if (level < 0.0 || level > 1.0) {
            throw InvalidInputError("noise levels must lie in [0, 1]");
        }
    }

    SweepArtifacts artifacts;
    std::string csv = "level,method,model_accuracy,rule_accuracy,rule_fidelity\n";
    for (double level : levels) {
        char level_name[32];
        std::snprintf(level_name, sizeof(level_name), "noise_%.2f", level);
        for (const std::string& method : config.methods) {
            Config per_run = config;
            per_run.noise_t = level;
            per_run.methods = {method};
            RunArtifacts run_artifacts = run(per_run, workers);

            const std::string dir =
                config.output_dir + "/" + level_name + "/" + method;
            write_bundle(run_artifacts, dir);
            artifacts.bundle_dirs.push_back(dir);

            const json& test = run_artifacts.results.at("final").at("test");
            csv += fmt_double(level) + "," + method + "," +
                   fmt_double(test.at("model_accuracy").get<double>()) + "," +
                   fmt_double(test.at("rule_accuracy").get<double>()) + "," +
                   fmt_double(test.at("rule_fidelity").get<double>()) + "\n";
        }
    }
    artifacts.summary_csv = csv;

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + config.output_dir +
                      "': " + ec.message());
    }
    const std::string summary_path = config.output_dir + "/summary.csv";
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + summary_path + "' for writing");
    }
    out << csv;
    return artifacts;
}

}  // namespace lrxfl::runner
