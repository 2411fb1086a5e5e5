#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "circuit.hpp"

namespace qrisk {

enum class LogicalGate { H, X, Z, Cx, Ccx, Rz, Measure };

struct LogicalOp {
    LogicalGate kind;
    double angle = 0.0; // Rz only
    std::vector<uint32_t> qubits;
};

struct LogicalCircuit {
    uint32_t num_qubits = 0;
    std::vector<LogicalOp> ops;
};

/// Undirected coupling constraints of a device.
struct CouplingGraph {
    uint32_t num_qubits = 0;
    std::set<std::pair<uint32_t, uint32_t>> edges; // stored with first < second

    void add_edge(uint32_t a, uint32_t b);
    bool coupled(uint32_t a, uint32_t b) const;
};

/// Placement of logical qubits onto a device graph.
struct Layout {
    CouplingGraph graph;
    std::vector<uint32_t> logical_to_physical;
};

/// Hub-and-leaves graph; logical data qubits map onto the leaves and the
/// workspace ancilla (logical qubit 3) onto the hub, so that every two-qubit
/// interaction in the lowered Grover circuit stays on a coupled pair.
Layout star_layout(uint32_t hub, const std::array<uint32_t, 3>& leaves,
                   uint32_t num_physical_qubits = 0);

/// Three-data-qubit Grover search for the basis state `marked` (bit i of the
/// string is data qubit i; it becomes bit i of the measured bitstring).
/// Logical qubit 3 is a |0> workspace ancilla used by the oracle and
/// diffusion phase flips (compute/phase/uncompute CCX chains onto it); it is
/// never measured. With 2 iterations the ideal success probability is
/// 121/128.
LogicalCircuit grover_circuit(const std::string& marked, uint32_t iterations = 2);

struct LowerOptions {
    bool merge_rz = false; // peephole: sum timeline-adjacent RZ pairs
};

/// Rewrites a logical circuit over {H, X, Z, CX, CCX, RZ, MEASURE} into the
/// native set {RZ, SX, X, CZ, MEASURE} under a fixed layout:
///   H   -> RZ(pi/2) SX RZ(pi/2)
///   Z   -> RZ(pi)
///   CX  -> H(t) CZ H(t)
///   CCX -> H(t)-conjugated CCZ phase network: 7 RZ(+-pi/4) and 10 CX whose
///          interactions touch only {a,t} and {b,t}, so a hub-targeted CCX
///          lowers on a star graph.
/// Any two-qubit gate landing on an uncoupled pair raises a routing-required
/// error; no SWAP insertion is attempted.
Circuit lower_to_native(const LogicalCircuit& logical, const Layout& layout,
                        const std::string& backend_id, const LowerOptions& options = {});

} // namespace qrisk
