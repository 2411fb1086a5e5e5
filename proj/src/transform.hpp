#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "patterns.hpp"

namespace qrisk {

/// Syntactic commutation: two ops commute when their qubit sets are disjoint,
/// or when both are diagonal in the computational basis (RZ, CZ). MEASURE
/// never commutes with anything sharing its qubit.
bool commutes(const Operation& a, const Operation& b);

/// Exchanges the order of ops i and j (i earlier). The pair must be adjacent:
/// either consecutive in the op list, or sharing at least one qubit with no
/// op in between touching any shared qubit. The exchange slides one of the
/// two past the ops separating them, so every crossed op must commute with
/// the slid one; the earlier op slides forward when possible, otherwise the
/// later one slides backward.
///
/// Raises RejectedSwap when the pair (or an op in between) does not commute,
/// InvalidArgument when the pair is not adjacent.
Circuit swap_adjacent(const Circuit& circuit, uint32_t i, uint32_t j);

struct DisruptOptions {
    /// Stop after breaking this many occurrences (the scaling experiment uses
    /// it to build partial-survivor variants). Unlimited by default.
    uint32_t max_disruptions = UINT32_MAX;
};

struct TransformResult {
    Circuit circuit;
    uint32_t initial_occurrences = 0;
    uint32_t disrupted = 0;
    std::vector<PatternOccurrence> undisruptable; ///< occurrences still present
    std::vector<std::pair<uint32_t, uint32_t>> swaps_applied;
    double elapsed_ms = 0.0;
};

/// Breaks pattern occurrences with commuting adjacent swaps, greedily and in
/// ascending position order. A swap candidate must keep the moment count
/// unchanged and strictly reduce the occurrence count to be accepted; the
/// circuit is re-scanned after every applied swap. Occurrences that no
/// commuting swap can break are reported, not fatal. For circuits on at most
/// 6 qubits the input/output unitaries are asserted equal up to global phase
/// (measurements stripped for the comparison).
TransformResult disrupt(const Circuit& circuit, const PatternDB& db,
                        const DisruptOptions& options = {});

std::string transform_result_to_json_str(const TransformResult& result, int indent = 2);

} // namespace qrisk
