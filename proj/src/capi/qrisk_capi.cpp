// C ABI over the qrisk core. Translation policy: every entry point catches
// qrisk::Error (mapped 1:1 onto qrisk_status), nlohmann parse errors
// (QRISK_PARSE_ERROR), bad_alloc and everything else (QRISK_INTERNAL /
// QRISK_UNKNOWN), and stores the message thread-locally.

#include "qrisk/qrisk.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "circuit.hpp"
#include "ddmin.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "hardware.hpp"
#include "lowering.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "patterns.hpp"
#include "sim.hpp"
#include "transform.hpp"

struct qrisk_circuit {
    qrisk::Circuit value;
};
struct qrisk_backend {
    qrisk::BackendSpec value;
};
struct qrisk_noise_model {
    qrisk::NoiseModel value;
};
struct qrisk_db {
    qrisk::PatternDB value;
};

namespace {

thread_local std::string t_last_error;

qrisk_status fail(qrisk_status code, const std::string& message) {
    t_last_error = message;
    return code;
}

qrisk_status map_error_code(qrisk::ErrorCode code) {
    switch (code) {
    case qrisk::ErrorCode::InvalidArgument: return QRISK_INVALID_ARGUMENT;
    case qrisk::ErrorCode::ParseError: return QRISK_PARSE_ERROR;
    case qrisk::ErrorCode::UnsupportedGate: return QRISK_UNSUPPORTED_GATE;
    case qrisk::ErrorCode::RoutingRequired: return QRISK_ROUTING_REQUIRED;
    case qrisk::ErrorCode::CapacityExceeded: return QRISK_CAPACITY_EXCEEDED;
    case qrisk::ErrorCode::DegenerateModel: return QRISK_DEGENERATE_MODEL;
    case qrisk::ErrorCode::RejectedSwap: return QRISK_REJECTED_SWAP;
    case qrisk::ErrorCode::VersionMismatch: return QRISK_VERSION_MISMATCH;
    case qrisk::ErrorCode::UndefinedCorrelation: return QRISK_UNDEFINED_CORRELATION;
    case qrisk::ErrorCode::IoError: return QRISK_IO_ERROR;
    case qrisk::ErrorCode::Internal: return QRISK_INTERNAL;
    }
    return QRISK_UNKNOWN;
}

/// Runs `body` and converts anything it throws into a status + last_error.
template <typename Fn>
qrisk_status guarded(Fn&& body) {
    try {
        body();
        return QRISK_OK;
    } catch (const qrisk::Error& e) {
        return fail(map_error_code(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(QRISK_PARSE_ERROR, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QRISK_CAPACITY_EXCEEDED, "out of memory");
    } catch (const std::exception& e) {
        return fail(QRISK_INTERNAL, e.what());
    } catch (...) {
        return fail(QRISK_UNKNOWN, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok)
        qrisk::raise(qrisk::ErrorCode::InvalidArgument, what);
}

/// Parses the shared discovery option block; absent keys keep defaults.
qrisk::DiscoveryOptions parse_discovery_options(const char* options_json) {
    qrisk::DiscoveryOptions options;
    if (options_json == nullptr || *options_json == '\0')
        return options;
    nlohmann::json j = nlohmann::json::parse(options_json);
    require(j.is_object(), "options must be a JSON object");
    options.oracle.shots = j.value("shots", options.oracle.shots);
    options.oracle.null_runs = j.value("null_runs", options.oracle.null_runs);
    options.oracle.sigma_multiplier =
        j.value("sigma_multiplier", options.oracle.sigma_multiplier);
    options.oracle.floor_multiplier =
        j.value("floor_multiplier", options.oracle.floor_multiplier);
    options.segment_size = j.value("segment_size", options.segment_size);
    options.n_max = j.value("n_max", options.n_max);
    return options;
}

qrisk::ScalingOptions parse_scaling_options(const char* options_json) {
    qrisk::ScalingOptions options;
    if (options_json == nullptr || *options_json == '\0')
        return options;
    nlohmann::json j = nlohmann::json::parse(options_json);
    require(j.is_object(), "options must be a JSON object");
    options.circuits = j.value("circuits", options.circuits);
    options.shots = j.value("shots", options.shots);
    options.gate_moments = j.value("gate_moments", options.gate_moments);
    options.fill_prob = j.value("fill_prob", options.fill_prob);
    options.cz_prob = j.value("cz_prob", options.cz_prob);
    options.alpha = j.value("alpha", options.alpha);
    return options;
}

} // namespace

extern "C" {

const char* qrisk_version(void) {
    return "1.0.0";
}

const char* qrisk_last_error(void) {
    return t_last_error.c_str();
}

void qrisk_string_free(char* s) {
    delete[] s;
}

void qrisk_set_jobs(uint32_t jobs) {
    qrisk::set_max_jobs(jobs);
}

/* --------------------------------------------------------------- circuit */

qrisk_status qrisk_circuit_from_json(const char* json, qrisk_circuit** out) {
    return guarded([&] {
        require(json != nullptr && out != nullptr, "null argument");
        auto circuit = qrisk::circuit_from_json_str(json);
        *out = new qrisk_circuit{std::move(circuit)};
    });
}

qrisk_status qrisk_circuit_from_text(const char* text, qrisk_circuit** out) {
    return guarded([&] {
        require(text != nullptr && out != nullptr, "null argument");
        auto circuit = qrisk::parse_circuit_text(text);
        *out = new qrisk_circuit{std::move(circuit)};
    });
}

qrisk_status qrisk_circuit_to_json(const qrisk_circuit* c, char** out_json) {
    return guarded([&] {
        require(c != nullptr && out_json != nullptr, "null argument");
        *out_json = dup_string(qrisk::circuit_to_json_str(c->value));
    });
}

qrisk_status qrisk_circuit_to_text(const qrisk_circuit* c, char** out_text) {
    return guarded([&] {
        require(c != nullptr && out_text != nullptr, "null argument");
        *out_text = dup_string(qrisk::circuit_to_text(c->value));
    });
}

void qrisk_circuit_free(qrisk_circuit* c) {
    delete c;
}

qrisk_status qrisk_grover(const char* marked, uint32_t iterations, uint32_t hub,
                          const uint32_t leaves[3], uint32_t num_physical_qubits,
                          const char* backend_id, qrisk_circuit** out) {
    return guarded([&] {
        require(marked != nullptr && leaves != nullptr && backend_id != nullptr &&
                    out != nullptr,
                "null argument");
        auto logical = qrisk::grover_circuit(marked, iterations);
        auto layout = qrisk::star_layout(hub, {leaves[0], leaves[1], leaves[2]},
                                         num_physical_qubits);
        auto circuit = qrisk::lower_to_native(logical, layout, backend_id);
        *out = new qrisk_circuit{std::move(circuit)};
    });
}

/* --------------------------------------------------------------- backend */

qrisk_status qrisk_backend_from_json(const char* json, qrisk_backend** out) {
    return guarded([&] {
        require(json != nullptr && out != nullptr, "null argument");
        auto spec = qrisk::backend_spec_from_json_str(json);
        *out = new qrisk_backend{std::move(spec)};
    });
}

qrisk_status qrisk_backend_to_json(const qrisk_backend* b, char** out_json) {
    return guarded([&] {
        require(b != nullptr && out_json != nullptr, "null argument");
        *out_json = dup_string(qrisk::backend_spec_to_json_str(b->value));
    });
}

void qrisk_backend_free(qrisk_backend* b) {
    delete b;
}

qrisk_status qrisk_backend_window_calibration(const qrisk_backend* b, uint32_t window_index,
                                              uint64_t master_seed, qrisk_noise_model** out) {
    return guarded([&] {
        require(b != nullptr && out != nullptr, "null argument");
        auto window = qrisk::open_window(b->value, window_index, master_seed);
        *out = new qrisk_noise_model{qrisk::export_calibration(window)};
    });
}

/* ----------------------------------------------------------- noise model */

qrisk_status qrisk_noise_model_from_json(const char* json, qrisk_noise_model** out) {
    return guarded([&] {
        require(json != nullptr && out != nullptr, "null argument");
        auto model = qrisk::noise_model_from_json_str(json);
        *out = new qrisk_noise_model{std::move(model)};
    });
}

qrisk_status qrisk_noise_model_to_json(const qrisk_noise_model* m, char** out_json) {
    return guarded([&] {
        require(m != nullptr && out_json != nullptr, "null argument");
        *out_json = dup_string(qrisk::noise_model_to_json_str(m->value));
    });
}

void qrisk_noise_model_free(qrisk_noise_model* m) {
    delete m;
}

/* ------------------------------------------------------------ pattern DB */

qrisk_status qrisk_db_create(qrisk_db** out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = new qrisk_db{};
    });
}

qrisk_status qrisk_db_from_json(const char* json, qrisk_db** out) {
    return guarded([&] {
        require(json != nullptr && out != nullptr, "null argument");
        auto db = qrisk::db_from_json_str(json);
        *out = new qrisk_db{std::move(db)};
    });
}

qrisk_status qrisk_db_to_json(const qrisk_db* db, char** out_json) {
    return guarded([&] {
        require(db != nullptr && out_json != nullptr, "null argument");
        *out_json = dup_string(qrisk::db_to_json_str(db->value));
    });
}

qrisk_status qrisk_db_load(const char* path, qrisk_db** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        auto db = qrisk::db_load(path);
        *out = new qrisk_db{std::move(db)};
    });
}

qrisk_status qrisk_db_save(const qrisk_db* db, const char* path) {
    return guarded([&] {
        require(db != nullptr && path != nullptr, "null argument");
        qrisk::db_save(db->value, path);
    });
}

qrisk_status qrisk_db_merge(qrisk_db* dst, const qrisk_db* src) {
    return guarded([&] {
        require(dst != nullptr && src != nullptr, "null argument");
        dst->value = qrisk::db_merge(dst->value, src->value);
    });
}

void qrisk_db_free(qrisk_db* db) {
    delete db;
}

/* ------------------------------------------------------------- pipelines */

qrisk_status qrisk_calibrate(const qrisk_circuit* c, const qrisk_noise_model* m,
                             const char* options_json, uint64_t seed, char** out_json) {
    return guarded([&] {
        require(c != nullptr && m != nullptr && out_json != nullptr, "null argument");
        auto options = parse_discovery_options(options_json);
        auto cal = qrisk::calibrate(c->value, m->value, options.oracle, seed);
        *out_json = dup_string(qrisk::calibration_to_json_str(cal));
    });
}

qrisk_status qrisk_discover(const qrisk_circuit* c, const qrisk_backend* b,
                            uint32_t window_index, const char* options_json,
                            uint64_t master_seed, char** out_json) {
    return guarded([&] {
        require(c != nullptr && b != nullptr && out_json != nullptr, "null argument");
        auto options = parse_discovery_options(options_json);
        auto window = qrisk::open_window(b->value, window_index, master_seed);
        auto exported = qrisk::export_calibration(window);
        qrisk::Executor hw = [&window](const qrisk::Circuit& circuit, uint32_t shots,
                                       uint64_t seed) {
            return qrisk::execute_on_window(circuit, window, shots, seed);
        };
        auto result = qrisk::discover(c->value, exported, hw, options, master_seed);
        *out_json = dup_string(qrisk::discovery_result_to_json_str(result));
    });
}

qrisk_status qrisk_verify(const qrisk_circuit* c, const qrisk_backend* b, uint32_t n_windows,
                          const char* options_json, uint64_t master_seed, char** out_json,
                          char** out_csv) {
    return guarded([&] {
        require(c != nullptr && b != nullptr && out_json != nullptr, "null argument");
        auto options = parse_discovery_options(options_json);
        auto report = qrisk::verify(c->value, b->value, n_windows, options, master_seed);
        char* json = dup_string(qrisk::persistence_report_to_json_str(report));
        if (out_csv != nullptr) {
            try {
                *out_csv = dup_string(qrisk::persistence_report_to_csv(report));
            } catch (...) {
                delete[] json;
                throw;
            }
        }
        *out_json = json;
    });
}

qrisk_status qrisk_promote(const char* report_json, double min_consistency, qrisk_db* db,
                           char** out_json) {
    return guarded([&] {
        require(report_json != nullptr && db != nullptr && out_json != nullptr,
                "null argument");
        auto report = qrisk::persistence_report_from_json_str(report_json);
        std::vector<uint32_t> skipped;
        auto entries = qrisk::promote(report, min_consistency, &skipped);
        qrisk::db_add(db->value, entries);
        nlohmann::json j{{"promoted", entries.size()}, {"skipped_segments", skipped}};
        *out_json = dup_string(j.dump(2));
    });
}

qrisk_status qrisk_scan(const qrisk_circuit* c, const qrisk_db* db, char** out_json) {
    return guarded([&] {
        require(c != nullptr && db != nullptr && out_json != nullptr, "null argument");
        auto occurrences = qrisk::scan(c->value, db->value);
        *out_json = dup_string(qrisk::occurrences_to_json_str(occurrences));
    });
}

qrisk_status qrisk_disrupt(const qrisk_circuit* c, const qrisk_db* db,
                           uint32_t max_disruptions, qrisk_circuit** out_circuit,
                           char** out_report_json) {
    return guarded([&] {
        require(c != nullptr && db != nullptr && out_circuit != nullptr &&
                    out_report_json != nullptr,
                "null argument");
        qrisk::DisruptOptions options;
        options.max_disruptions = max_disruptions;
        auto result = qrisk::disrupt(c->value, db->value, options);
        char* report = dup_string(qrisk::transform_result_to_json_str(result));
        try {
            *out_circuit = new qrisk_circuit{std::move(result.circuit)};
        } catch (...) {
            delete[] report;
            throw;
        }
        *out_report_json = report;
    });
}

qrisk_status qrisk_scaling_experiment(const qrisk_backend* b, const char* options_json,
                                      uint64_t master_seed, char** out_json, char** out_csv,
                                      char** out_plot) {
    return guarded([&] {
        require(b != nullptr && out_json != nullptr, "null argument");
        auto options = parse_scaling_options(options_json);
        auto report = qrisk::scaling_experiment(b->value, options, master_seed);
        std::string json = qrisk::scaling_report_to_json_str(report);
        std::string csv = out_csv != nullptr ? qrisk::scaling_report_to_csv(report) : "";
        std::string plot =
            out_plot != nullptr ? qrisk::scaling_report_to_plot_data(report) : "";
        char* out[3] = {nullptr, nullptr, nullptr};
        try {
            out[0] = dup_string(json);
            if (out_csv != nullptr) out[1] = dup_string(csv);
            if (out_plot != nullptr) out[2] = dup_string(plot);
        } catch (...) {
            for (char* s : out) delete[] s;
            throw;
        }
        *out_json = out[0];
        if (out_csv != nullptr) *out_csv = out[1];
        if (out_plot != nullptr) *out_plot = out[2];
    });
}

} // extern "C"
