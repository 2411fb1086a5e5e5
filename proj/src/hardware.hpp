#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "lowering.hpp"
#include "match.hpp"
#include "sim.hpp"

namespace qrisk {

/// A hidden execution-dependent error source: whenever `tmpl` occurs
/// contiguously in an executed circuit at the bound qubits, one extra
/// depolarizing channel of strength `excess` hits those qubits right after the
/// occurrence's final op. This is the ground truth the discovery pipeline is
/// supposed to recover without ever being shown it.
struct ContextRule {
    GateTemplate tmpl;
    std::vector<uint32_t> binding; ///< physical qubit per template role
    double excess = 0.0;           ///< in (0, 1]

    bool operator==(const ContextRule&) const = default;
};

void validate(const ContextRule& rule);

struct DriftConfig {
    /// Sigma of the lognormal multiplicative jitter applied to every
    /// calibration scalar once per window. 0 disables drift.
    double sigma_mult = 0.0;
    /// Probability that a window carries one extra short-lived rule that
    /// exists in that window only.
    double transient_prob = 0.0;
    /// Excess range the transient rule draws from.
    double transient_excess_min = 0.02;
    double transient_excess_max = 0.08;

    bool operator==(const DriftConfig&) const = default;
};

struct BackendSpec {
    std::string backend_id;
    CouplingGraph graph;
    NoiseModel base_calibration;
    std::vector<ContextRule> hidden_rules;
    DriftConfig drift;
};

void validate(const BackendSpec& spec);
BackendSpec backend_spec_from_json_str(const std::string& text);
std::string backend_spec_to_json_str(const BackendSpec& spec, int indent = 2);

/// One period of stable (but jittered) calibration. Immutable once opened;
/// everything downstream is a pure function of the window plus a seed.
struct CalibrationWindow {
    std::string backend_id;
    uint32_t num_physical_qubits = 0;
    uint32_t window_id = 0;
    uint64_t seed = 0; ///< derived stream key, recorded for audit
    NoiseModel realized_calibration;
    std::vector<ContextRule> realized_rules;
};

/// Realizes window `window_index`: jitters every calibration scalar of the
/// base model by an independent lognormal factor exp(sigma_mult * N(0,1))
/// drawn from a stream keyed by (master_seed, window_index), clamps
/// probabilities to [0,1] and T2 to 2*T1, and rolls the optional transient
/// rule. Deterministic: same inputs, same window.
CalibrationWindow open_window(const BackendSpec& spec, uint32_t window_index,
                              uint64_t master_seed);

/// Runs the circuit exactly like `noisy_sample` under the window's realized
/// calibration, except that after the final gate of every contiguous
/// occurrence of a realized rule the rule's excess depolarizing channel also
/// fires on its bound qubits (once per occurrence per trajectory).
Distribution execute_on_window(const Circuit& circuit, const CalibrationWindow& window,
                               uint32_t shots, uint64_t seed);

/// What a client is allowed to see: the realized per-window noise model with
/// no trace of the rules. The discrepancy oracle simulates against this.
NoiseModel export_calibration(const CalibrationWindow& window);

/// The exact occurrence relation `execute_on_window` fires on, exposed so
/// tests can assert it coincides with the pattern scanner's.
std::vector<std::vector<uint32_t>> rule_occurrences(const Circuit& circuit,
                                                    const ContextRule& rule);

} // namespace qrisk
