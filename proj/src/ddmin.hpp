#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "oracle.hpp"

namespace qrisk {

/// drop(removed, remaining): does deleting `removed` from the current
/// candidate circuit kill the excess signal? Both lists are ascending
/// segment indices.
using DropPredicate =
    std::function<bool(const std::vector<uint32_t>& removed, const std::vector<uint32_t>& remaining)>;

/// sufficient(kept): does keeping only `kept` preserve the excess signal?
using SufficientPredicate = std::function<bool(const std::vector<uint32_t>& kept)>;

struct DdminTrace {
    uint64_t predicate_calls = 0;
    uint32_t restarts = 0; ///< narrowing steps: times the candidate set shrank
};

/// Delta-debugging minimization over an ordered segment list.
///
/// Maintains a candidate set and a partition count n starting at 2. Each scan
/// splits the candidates into min(n, |candidates|) contiguous, as-even-as-
/// possible groups and tests them in ascending order; the first rule that
/// fires narrows the candidates and restarts with n = 2:
///   - drop(G_i, candidates \ G_i)          -> candidates := G_i
///   - drop(candidates \ G_i, G_i)          -> candidates := candidates \ G_i
///   - sufficient(G_i) and |G_i| < |cands|  -> candidates := G_i
/// A fruitless scan doubles n. Returns the candidates once |candidates| < 2
/// or n exceeds n_max.
///
/// `on_restart`, when set, runs after every narrowing with the new candidate
/// set (the discovery pipeline uses it to re-measure its baseline).
std::vector<uint32_t> ddmin(const std::vector<uint32_t>& segments, const DropPredicate& drop,
                            const SufficientPredicate& sufficient, uint32_t n_max = 16,
                            DdminTrace* trace = nullptr,
                            const std::function<void(const std::vector<uint32_t>&)>& on_restart = {});

enum class DiscoveryStatus { Found, NoExcess, Exhausted };

const char* discovery_status_name(DiscoveryStatus s);

/// One line of the discovery audit trail: which subset was measured, what
/// came back, and how it was used.
struct OracleCallRecord {
    std::string purpose; ///< baseline | drop | sufficient | confirm
    std::vector<uint32_t> kept_segments;
    RatioMeasurement measurement;
    bool decision = false; ///< the predicate outcome this call produced
    bool skipped = false;  ///< denominator floor vetoed the measurement
    bool cached = false;   ///< served from the subset cache, no new executions
};

struct DiscoveryOptions {
    OracleConfig oracle;
    uint32_t segment_size = 3;
    uint32_t n_max = 16;
};

struct DiscoveryResult {
    DiscoveryStatus status = DiscoveryStatus::NoExcess;
    std::set<uint32_t> flagged_segments;
    double baseline_R = 0.0; ///< full-circuit ratio
    OracleCalibration calibration;
    uint64_t oracle_calls = 0;
    uint32_t narrowing_steps = 0;
    uint64_t skipped_steps = 0;
    std::vector<Segment> segments; ///< segmentation used, for fragment mapping
    std::vector<OracleCallRecord> ledger;
};

/// The offline discovery pipeline: segment the circuit, calibrate the null
/// threshold, gate on the full-circuit baseline, then run oracle-backed DDMin.
///
/// Deliberately blind: all it knows of the hardware is the executor
/// capability and the exported (rule-free) calibration model. The baseline is
/// re-measured after every narrowing and replaces the previous one only when
/// its denominator holds.
DiscoveryResult discover(const Circuit& circuit, const NoiseModel& exported_calibration,
                         const Executor& hw, const DiscoveryOptions& options, uint64_t seed);

std::string discovery_result_to_json_str(const DiscoveryResult& result, int indent = 2);

} // namespace qrisk
