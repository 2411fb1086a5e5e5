#pragma once

#include <cstdint>
#include <vector>

#include "circuit.hpp"

namespace qrisk {

/// One step of an angle-free gate template. Roles index into a concrete
/// qubit binding tuple, so the same template can be bound to different
/// physical qubits.
struct TemplateStep {
    GateKind kind;
    std::vector<uint32_t> roles;

    bool operator==(const TemplateStep& other) const {
        return kind == other.kind && roles == other.roles;
    }
};

struct GateTemplate {
    std::vector<TemplateStep> steps;

    bool operator==(const GateTemplate& other) const { return steps == other.steps; }
};

/// All occurrences of `tmpl` bound to `binding` in the circuit. An occurrence
/// is the lexicographically smallest ascending op-id list that matches the
/// steps in order such that, on every involved qubit, the matched ops are
/// consecutive on that qubit's timeline (no intervening op on that qubit).
/// Ops on disjoint qubits may interleave freely. CZ steps match either qubit
/// order. Overlapping occurrences are all reported.
std::vector<std::vector<uint32_t>> find_occurrences(const Circuit& circuit,
                                                    const GateTemplate& tmpl,
                                                    const std::vector<uint32_t>& binding);

} // namespace qrisk
