#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "ddmin.hpp"
#include "hardware.hpp"
#include "match.hpp"

namespace qrisk {

/// A verified abnormal gate-sequence pattern: what to look for (angle-free
/// template bound to concrete physical qubits), where it came from, and how
/// consistently independent calibration windows confirmed it.
struct PatternEntry {
    std::string backend_id;
    std::vector<uint32_t> qubit_tuple; ///< physical qubits, in first-appearance order
    GateTemplate tmpl;
    uint32_t windows_flagged = 0;
    uint32_t windows_total = 0;
    std::vector<uint64_t> flagged_window_uids;  ///< windows that flagged it
    std::vector<uint64_t> examined_window_uids; ///< windows that looked at all
    std::string source;                         ///< human-readable provenance
    std::string created;                        ///< ISO-8601, informational only
    std::string updated;

    double consistency() const {
        return windows_total == 0 ? 0.0 : double(windows_flagged) / double(windows_total);
    }
    bool same_key(const PatternEntry& other) const {
        return backend_id == other.backend_id && qubit_tuple == other.qubit_tuple &&
               tmpl == other.tmpl;
    }
};

struct PatternDB {
    static constexpr uint32_t kFormatVersion = 1;
    std::vector<PatternEntry> entries;
};

/// How one calibration window judged the circuit.
struct WindowOutcome {
    uint32_t window_index = 0;
    uint64_t window_uid = 0; ///< the window's derived seed; campaign-unique
    DiscoveryStatus status = DiscoveryStatus::NoExcess;
    std::vector<uint32_t> flagged_segments;
    double baseline_R = 0.0;
    double tau = 0.0;
    double tvd_min = 0.0;
    uint64_t oracle_calls = 0;
};

/// Cross-window persistence evidence for every segment of one circuit.
struct PersistenceReport {
    std::string backend_id;
    uint64_t master_seed = 0;
    Circuit circuit; ///< embedded so promotion can extract concrete templates
    std::vector<Segment> segments;
    std::vector<WindowOutcome> windows;

    uint32_t flag_count(uint32_t segment) const;
    std::vector<uint64_t> flagged_uids(uint32_t segment) const;
};

/// Runs `discover` once per calibration window — each window opens fresh,
/// calibrates its own threshold, and measures its own baseline — and tallies
/// which segments were flagged where.
PersistenceReport verify(const Circuit& circuit, const BackendSpec& spec, uint32_t n_windows,
                         const DiscoveryOptions& options, uint64_t master_seed);

/// Turns persistent evidence into database entries: one per segment whose
/// flag consistency reaches `min_consistency`. A segment flagged only once is
/// never promoted, whatever the threshold. Templates are the segment's
/// concrete gate ops with RZ angles stripped and qubits renamed to roles in
/// first-appearance order; segments with fewer than two gate ops cannot form
/// a template and are skipped (listed in `skipped_segments` when given).
std::vector<PatternEntry> promote(const PersistenceReport& report, double min_consistency = 0.7,
                                  std::vector<uint32_t>* skipped_segments = nullptr);

PatternDB db_load(const std::string& path);
void db_save(const PatternDB& db, const std::string& path); ///< atomic: temp + rename
PatternDB db_from_json_str(const std::string& text);
std::string db_to_json_str(const PatternDB& db, int indent = 2);

/// Unions evidence. Entries with the same (backend_id, qubit_tuple, template)
/// key fuse by window-uid union, so merging disjoint campaigns adds evidence
/// while re-merging the same evidence changes nothing.
PatternDB db_merge(const PatternDB& a, const PatternDB& b);

/// Adds `entries` into `db` (same fusion rule as db_merge).
void db_add(PatternDB& db, const std::vector<PatternEntry>& entries);

struct PatternOccurrence {
    size_t entry_index = 0; ///< into db.entries
    std::vector<uint32_t> op_ids;
};

/// All occurrences of every DB entry whose backend matches the circuit's.
/// An occurrence must be contiguous on each involved qubit's timeline —
/// exactly the relation the mock hardware fires rules on.
std::vector<PatternOccurrence> scan(const Circuit& circuit, const PatternDB& db);

std::string occurrences_to_json_str(const std::vector<PatternOccurrence>& occurrences,
                                    int indent = 2);

std::string persistence_report_to_json_str(const PersistenceReport& report, int indent = 2);
PersistenceReport persistence_report_from_json_str(const std::string& text);

/// One row per segment: flag marks per window, totals, consistency.
std::string persistence_report_to_csv(const PersistenceReport& report);

} // namespace qrisk
