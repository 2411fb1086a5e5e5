/* qrisk — execution-dependent error-pattern discovery and disruption for
 * compiled quantum circuits.
 *
 * C89-compatible surface over the C++ core. Objects cross the boundary as
 * opaque handles; structured inputs/outputs cross as JSON strings (UTF-8).
 * Every function returning qrisk_status reports failure details through
 * qrisk_last_error(). Strings returned through char** out-parameters are
 * heap-allocated and must be released with qrisk_string_free().
 */
#ifndef QRISK_H
#define QRISK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QRISK_API __declspec(dllexport)
#else
#define QRISK_API __attribute__((visibility("default")))
#endif

typedef enum qrisk_status {
    QRISK_OK = 0,
    QRISK_INVALID_ARGUMENT = 1,
    QRISK_PARSE_ERROR = 2,
    QRISK_UNSUPPORTED_GATE = 3,
    QRISK_ROUTING_REQUIRED = 4,
    QRISK_CAPACITY_EXCEEDED = 5,
    QRISK_DEGENERATE_MODEL = 6,
    QRISK_REJECTED_SWAP = 7,
    QRISK_VERSION_MISMATCH = 8,
    QRISK_UNDEFINED_CORRELATION = 9,
    QRISK_IO_ERROR = 10,
    QRISK_INTERNAL = 11,
    QRISK_UNKNOWN = 127
} qrisk_status;

typedef struct qrisk_circuit qrisk_circuit;
typedef struct qrisk_backend qrisk_backend;
typedef struct qrisk_noise_model qrisk_noise_model;
typedef struct qrisk_db qrisk_db;

/* ------------------------------------------------------------------ core */

/* Library semantic version, static storage (do not free). */
QRISK_API const char* qrisk_version(void);

/* Message of the calling thread's most recent failure, static thread-local
 * storage valid until the thread's next failing qrisk call. Empty string when
 * no failure has occurred. */
QRISK_API const char* qrisk_last_error(void);

QRISK_API void qrisk_string_free(char* s);

/* Bounds worker threads for window/circuit batches. 0 = one per logical
 * core (default). */
QRISK_API void qrisk_set_jobs(uint32_t jobs);

/* --------------------------------------------------------------- circuit */

QRISK_API qrisk_status qrisk_circuit_from_json(const char* json, qrisk_circuit** out);
/* Semicolon-terminated text form: "backend: id; qubits: N;" header, then one
 * op per statement, e.g. "rz(0.39) q107;", "cz q108, q107;", "measure q5;". */
QRISK_API qrisk_status qrisk_circuit_from_text(const char* text, qrisk_circuit** out);
QRISK_API qrisk_status qrisk_circuit_to_text(const qrisk_circuit* c, char** out_text);
QRISK_API qrisk_status qrisk_circuit_to_json(const qrisk_circuit* c, char** out_json);
QRISK_API void qrisk_circuit_free(qrisk_circuit* c);

/* Compiled 3-qubit Grover search over the native gate set on a star-coupled
 * layout: data qubits on `leaves`, workspace ancilla on `hub`. `marked` is a
 * 3-character bitstring; with 2 iterations the ideal success probability is
 * 121/128. num_physical_qubits 0 sizes the device to the layout; backend_id
 * is stamped into the circuit for DB/backend matching. */
QRISK_API qrisk_status qrisk_grover(const char* marked, uint32_t iterations, uint32_t hub,
                                    const uint32_t leaves[3], uint32_t num_physical_qubits,
                                    const char* backend_id, qrisk_circuit** out);

/* --------------------------------------------------------------- backend */

QRISK_API qrisk_status qrisk_backend_from_json(const char* json, qrisk_backend** out);
QRISK_API qrisk_status qrisk_backend_to_json(const qrisk_backend* b, char** out_json);
QRISK_API void qrisk_backend_free(qrisk_backend* b);

/* The calibration snapshot a window would export (drift applied, hidden
 * rules invisible) — what discovery is allowed to see. */
QRISK_API qrisk_status qrisk_backend_window_calibration(const qrisk_backend* b,
                                                        uint32_t window_index,
                                                        uint64_t master_seed,
                                                        qrisk_noise_model** out);

/* ----------------------------------------------------------- noise model */

QRISK_API qrisk_status qrisk_noise_model_from_json(const char* json, qrisk_noise_model** out);
QRISK_API qrisk_status qrisk_noise_model_to_json(const qrisk_noise_model* m, char** out_json);
QRISK_API void qrisk_noise_model_free(qrisk_noise_model* m);

/* ------------------------------------------------------------ pattern DB */

QRISK_API qrisk_status qrisk_db_create(qrisk_db** out);
QRISK_API qrisk_status qrisk_db_from_json(const char* json, qrisk_db** out);
QRISK_API qrisk_status qrisk_db_to_json(const qrisk_db* db, char** out_json);
QRISK_API qrisk_status qrisk_db_load(const char* path, qrisk_db** out);
QRISK_API qrisk_status qrisk_db_save(const qrisk_db* db, const char* path);
/* Evidence-union merge of src into dst (idempotent). */
QRISK_API qrisk_status qrisk_db_merge(qrisk_db* dst, const qrisk_db* src);
QRISK_API void qrisk_db_free(qrisk_db* db);

/* ------------------------------------------------------------- pipelines */

/* options_json for the oracle/discovery family; every key optional:
 *   {"shots":8192, "null_runs":5, "sigma_multiplier":2.0,
 *    "floor_multiplier":2.0, "segment_size":3, "n_max":16}          */

/* Null-threshold calibration of the ratio oracle for one circuit.
 * Output: {"tau":.., "tvd_min":.., "null_ratios":[..]}. */
QRISK_API qrisk_status qrisk_calibrate(const qrisk_circuit* c, const qrisk_noise_model* m,
                                       const char* options_json, uint64_t seed,
                                       char** out_json);

/* Statistically gated delta-debugging discovery against one calibration
 * window of the mock backend. Output: DiscoveryResult JSON (status, flagged
 * segments, baseline_R, calibration, full oracle ledger). */
QRISK_API qrisk_status qrisk_discover(const qrisk_circuit* c, const qrisk_backend* b,
                                      uint32_t window_index, const char* options_json,
                                      uint64_t master_seed, char** out_json);

/* Independent discovery across n_windows calibration windows. Output:
 * PersistenceReport JSON (per-window outcomes, per-segment tallies).
 * out_csv (optional, may be NULL): per-window flag matrix as CSV. */
QRISK_API qrisk_status qrisk_verify(const qrisk_circuit* c, const qrisk_backend* b,
                                    uint32_t n_windows, const char* options_json,
                                    uint64_t master_seed, char** out_json, char** out_csv);

/* Promotes segments with cross-window consistency >= min_consistency (and
 * flagged in >= 2 windows) from a PersistenceReport into db. Output:
 * {"promoted":k, "skipped_segments":[..]}. */
QRISK_API qrisk_status qrisk_promote(const char* report_json, double min_consistency,
                                     qrisk_db* db, char** out_json);

/* All timeline-contiguous occurrences of db patterns in c. Output:
 * {"count":n, "occurrences":[{"entry_index":i,"op_ids":[..]}]}. */
QRISK_API qrisk_status qrisk_scan(const qrisk_circuit* c, const qrisk_db* db, char** out_json);

/* Breaks pattern occurrences with semantics- and depth-preserving commuting
 * swaps. max_disruptions = UINT32_MAX for unlimited. Returns the rewritten
 * circuit and a TransformResult JSON report. */
QRISK_API qrisk_status qrisk_disrupt(const qrisk_circuit* c, const qrisk_db* db,
                                     uint32_t max_disruptions, qrisk_circuit** out_circuit,
                                     char** out_report_json);

/* Randomized scaling experiment (survivor groups 3..0) on an injected
 * backend. options_json keys (all optional): {"circuits":10, "shots":8192,
 * "gate_moments":60, "fill_prob":0.6, "cz_prob":0.3, "alpha":0.01}.
 * Output: ScalingReport JSON (rows, groups, correlations, reduction).
 * out_csv / out_plot (optional, may be NULL): row table as CSV, and
 * whitespace-separated "survivors tvd" rows for gnuplot. */
QRISK_API qrisk_status qrisk_scaling_experiment(const qrisk_backend* b,
                                                const char* options_json,
                                                uint64_t master_seed, char** out_json,
                                                char** out_csv, char** out_plot);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QRISK_H */
