#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "sim.hpp"

namespace qrisk {

/// Capability handed to the discovery pipeline for running a circuit on
/// "hardware". Discovery sees nothing else of the backend — no rules, no
/// spec — which is what keeps the search honest.
using Executor = std::function<Distribution(const Circuit&, uint32_t shots, uint64_t seed)>;

struct OracleConfig {
    uint32_t shots = 8192;
    uint32_t null_runs = 5;       ///< paired noisy simulations for the null spread
    double sigma_multiplier = 2.0; ///< tau = mean + this * std - 1
    double floor_multiplier = 2.0; ///< tvd_min = this * mean inter-sample TVD
};

void validate(const OracleConfig& cfg);

/// Per-circuit null statistics: how much the ratio R wobbles under pure shot
/// noise, and below which denominator a ratio stops meaning anything.
struct OracleCalibration {
    double tau = 0.0;     ///< excess-over-1 threshold, >= 0
    double tvd_min = 0.0; ///< denominator floor, > 0
    std::vector<double> null_ratios;
};

struct RatioMeasurement {
    double tvd_ideal_hw = 0.0;
    double tvd_ideal_noisy = 0.0;
    double R = 0.0; ///< meaningful only when denominator_ok
    bool denominator_ok = false;
};

/// Runs `null_runs` pairs of independent noisy simulations of the circuit.
/// Each pair contributes one null ratio TVD(ideal, noisy2)/TVD(ideal, noisy1)
/// and one inter-sample TVD. tau and tvd_min follow from their spread.
/// Raises DegenerateModel when the model produces no ideal/noisy gap to
/// measure against.
OracleCalibration calibrate(const Circuit& circuit, const NoiseModel& nm,
                            const OracleConfig& cfg, uint64_t seed);

/// One oracle query: exact ideal distribution, one noisy simulation, one
/// hardware execution. Per-call seeds are derived from (seed, circuit
/// fingerprint, purpose) so identical subsets get identical measurements.
RatioMeasurement measure_ratio(const Circuit& circuit, const NoiseModel& nm, const Executor& hw,
                               const OracleCalibration& cal, uint32_t shots, uint64_t seed);

/// Memo of measurements keyed by circuit fingerprint, shared across the many
/// times DDMin re-queries the same kept-segment subset. Thread-safe;
/// duplicate inserts of the same key are harmless (measurements for a key are
/// deterministic).
class OracleCache {
  public:
    bool lookup(uint64_t key, RatioMeasurement& out) const;
    void store(uint64_t key, const RatioMeasurement& m);
    size_t size() const;

  private:
    mutable std::mutex mu_;
    std::map<uint64_t, RatioMeasurement> memo_;
};

/// As measure_ratio, but consults/fills `cache` (keyed by the circuit
/// fingerprint). Returns true in *cache_hit when no new executions ran.
RatioMeasurement measure_ratio_cached(const Circuit& circuit, const NoiseModel& nm,
                                      const Executor& hw, const OracleCalibration& cal,
                                      uint32_t shots, uint64_t seed, OracleCache& cache,
                                      bool* cache_hit = nullptr);

/// Evidence that the removed segments carried signal: the reduced circuit's
/// ratio dropped by more than tau below the baseline. Denominator failures
/// never count as evidence.
bool drop_check(double baseline_R, const RatioMeasurement& reduced, const OracleCalibration& cal);

/// Evidence that the kept segments alone preserve the discrepancy:
/// R > 1 + tau with a healthy denominator.
bool sufficient_check(const RatioMeasurement& kept, const OracleCalibration& cal);

std::string calibration_to_json_str(const OracleCalibration& cal, int indent = 2);

} // namespace qrisk
