#include "lrxfl/lrxfl.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "runner.hpp"

// The opaque config handle keeps the raw JSON document so overrides can be
// applied before validation; every entry point re-validates.
struct lrxfl_config {
    nlohmann::json raw;
};

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out != nullptr) {
        std::memcpy(out, text.c_str(), text.size() + 1);
    }
    return out;
}

lrxfl_status fail(lrxfl_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
lrxfl_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return LRXFL_OK;
    } catch (const lrxfl::SchemaError& err) {
        return fail(LRXFL_ERR_SCHEMA, err.what());
    } catch (const lrxfl::ParseError& err) {
        return fail(LRXFL_ERR_PARSE, err.what());
    } catch (const lrxfl::IoError& err) {
        return fail(LRXFL_ERR_IO, err.what());
    } catch (const lrxfl::ContradictionError& err) {
        return fail(LRXFL_ERR_CONTRADICTION, err.what());
    } catch (const lrxfl::DivergenceError& err) {
        return fail(LRXFL_ERR_DIVERGENCE, err.what());
    } catch (const lrxfl::InvalidInputError& err) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT, err.what());
    } catch (const lrxfl::IndexError& err) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT, err.what());
    } catch (const std::exception& err) {
        return fail(LRXFL_ERR_INTERNAL, err.what());
    }
}

lrxfl::runner::Config validated(const lrxfl_config* config) {
    return lrxfl::runner::Config::from_json(config->raw);
}

}  // namespace

extern "C" {

unsigned lrxfl_abi_version(void) { return 1; }

const char* lrxfl_last_error(void) { return g_last_error.c_str(); }

lrxfl_status lrxfl_config_load(const char* path, lrxfl_config** out_config) {
    if (path == nullptr || out_config == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_config_load requires a path and an out-parameter");
    }
    *out_config = nullptr;
    return guarded([&] {
        std::ifstream in(path);
        if (!in) {
            throw lrxfl::IoError("cannot open config '" + std::string(path) +
                                 "'");
        }
        nlohmann::json raw;
        try {
            in >> raw;
        } catch (const nlohmann::json::parse_error& err) {
            throw lrxfl::ParseError("config is not valid JSON: " +
                                    std::string(err.what()));
        }
        lrxfl::runner::Config::from_json(raw);  // validate eagerly
        *out_config = new lrxfl_config{std::move(raw)};
    });
}

lrxfl_status lrxfl_config_parse(const char* json_text,
                                lrxfl_config** out_config) {
    if (json_text == nullptr || out_config == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_config_parse requires text and an out-parameter");
    }
    *out_config = nullptr;
    return guarded([&] {
        nlohmann::json raw;
        try {
            raw = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::parse_error& err) {
            throw lrxfl::ParseError("config is not valid JSON: " +
                                    std::string(err.what()));
        }
        lrxfl::runner::Config::from_json(raw);
        *out_config = new lrxfl_config{std::move(raw)};
    });
}

lrxfl_status lrxfl_config_override(lrxfl_config* config,
                                   const char* dotted_key, const char* value) {
    if (config == nullptr || dotted_key == nullptr || value == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_config_override requires a config, key and value");
    }
    return guarded([&] {
        nlohmann::json updated = config->raw;
        lrxfl::runner::apply_override(updated, dotted_key, value);
        lrxfl::runner::Config::from_json(updated);  // keep handle valid
        config->raw = std::move(updated);
    });
}

lrxfl_status lrxfl_config_dump(const lrxfl_config* config, char** out_json) {
    if (config == nullptr || out_json == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_config_dump requires a config and an out-parameter");
    }
    *out_json = nullptr;
    return guarded([&] {
        const std::string text = validated(config).echo().dump(2);
        *out_json = copy_string(text);
        if (*out_json == nullptr) {
            throw std::bad_alloc();
        }
    });
}

void lrxfl_config_free(lrxfl_config* config) { delete config; }

lrxfl_status lrxfl_run(const lrxfl_config* config, int workers,
                       char** out_results_json) {
    if (config == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT, "lrxfl_run requires a config");
    }
    if (out_results_json != nullptr) *out_results_json = nullptr;
    return guarded([&] {
        const lrxfl::runner::Config run_config = validated(config);
        lrxfl::runner::RunArtifacts artifacts =
            lrxfl::runner::run(run_config, workers);
        lrxfl::runner::write_bundle(artifacts, run_config.output_dir);
        if (out_results_json != nullptr) {
            *out_results_json = copy_string(artifacts.results.dump(2) + "\n");
            if (*out_results_json == nullptr) {
                throw std::bad_alloc();
            }
        }
    });
}

lrxfl_status lrxfl_sweep_noise(const lrxfl_config* config,
                               const double* levels, size_t num_levels,
                               int workers, char** out_summary_csv) {
    if (config == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_sweep_noise requires a config");
    }
    if (levels == nullptr && num_levels != 0) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_sweep_noise received a null level array");
    }
    if (out_summary_csv != nullptr) *out_summary_csv = nullptr;
    return guarded([&] {
        std::vector<double> grid;
        if (levels == nullptr || num_levels == 0) {
            grid = lrxfl::runner::kDefaultNoiseLevels;
        } else {
            grid.assign(levels, levels + num_levels);
        }
        const lrxfl::runner::Config run_config = validated(config);
        lrxfl::runner::SweepArtifacts artifacts =
            lrxfl::runner::sweep_noise(run_config, grid, workers);
        if (out_summary_csv != nullptr) {
            *out_summary_csv = copy_string(artifacts.summary_csv);
            if (*out_summary_csv == nullptr) {
                throw std::bad_alloc();
            }
        }
    });
}

lrxfl_status lrxfl_inspect_rules(const char* results_path,
                                 const char* class_filter, char** out_report) {
    if (results_path == nullptr || out_report == nullptr) {
        return fail(LRXFL_ERR_INVALID_ARGUMENT,
                    "lrxfl_inspect_rules requires a results path and an "
                    "out-parameter");
    }
    *out_report = nullptr;
    return guarded([&] {
        const std::string report = lrxfl::runner::inspect_rules_file(
            results_path, class_filter == nullptr ? "" : class_filter);
        *out_report = copy_string(report);
        if (*out_report == nullptr) {
            throw std::bad_alloc();
        }
    });
}

void lrxfl_string_free(char* text) { std::free(text); }

}  // extern "C"
