#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace qrisk {

/// Native gate set. RZ carries an angle; everything else is fixed.
enum class GateKind { Rz, Sx, X, Cz, Measure };

const char* gate_name(GateKind kind);
GateKind gate_from_name(const std::string& name);

struct Operation {
    GateKind kind;
    double angle = 0.0;             // meaningful for Rz only
    std::vector<uint32_t> qubits;   // 1 qubit, or 2 distinct for Cz

    bool operator==(const Operation& other) const {
        return kind == other.kind && angle == other.angle && qubits == other.qubits;
    }
};

/// A compiled circuit over physical qubit indices. An op's id is its position
/// in `ops`; removal/transform passes renumber implicitly.
struct Circuit {
    std::string backend_id;
    uint32_t num_physical_qubits = 0;
    std::vector<Operation> ops;

    std::set<uint32_t> used_qubits() const;
    /// Measured qubits in MEASURE-op order; first entry is the most
    /// significant bit of result bitstrings.
    std::vector<uint32_t> measured_qubits() const;
};

/// Throws on malformed circuits: bad arity, out-of-range qubits, duplicate CZ
/// qubits, RZ angle on a non-RZ gate, or any op on a qubit after its MEASURE.
void validate(const Circuit& circuit);

/// Greedy moment partition: each op lands in the earliest moment after every
/// previous op touching one of its qubits. Returns op ids per moment; the
/// dense moment list preserves per-qubit op order.
std::vector<std::vector<uint32_t>> partition_into_moments(const Circuit& circuit);

struct Segment {
    uint32_t index = 0;
    uint32_t moment_begin = 0;   // inclusive
    uint32_t moment_end = 0;     // exclusive
    std::vector<uint32_t> op_ids;
};

/// Fixed-size chunks of the moment list; the final segment may be short.
std::vector<Segment> group_segments(const std::vector<std::vector<uint32_t>>& moments,
                                    uint32_t segment_size);

/// Rebuilds the circuit keeping only ops whose segment index is in `keep`.
/// MEASURE ops are pinned: they survive even when their segment is removed,
/// in original relative order.
Circuit remove_segments(const Circuit& circuit, const std::vector<Segment>& segments,
                        const std::set<uint32_t>& keep);

/// Per-qubit timelines: qubit index -> op ids touching it, in circuit order.
std::vector<std::vector<uint32_t>> qubit_timelines(const Circuit& circuit);

/// Order-sensitive content hash (backend, qubit count, every op) used for
/// cache keys and derived seeds.
uint64_t fingerprint(const Circuit& circuit);

// Text format:
//   # comment
//   backend: ibm_fez; qubits: 156;
//   sx q107;
//   rz(0.39269908169872414) q107;
//   cz q108, q107;
//   measure q107;
Circuit parse_circuit_text(const std::string& text);
std::string circuit_to_text(const Circuit& circuit);

// Canonical JSON: {"backend_id", "num_physical_qubits", "ops": [{"kind",
// "angle"?, "qubits"}]}. Angles round-trip exactly.
Circuit circuit_from_json_str(const std::string& json_text);
std::string circuit_to_json_str(const Circuit& circuit, int indent = 2);

} // namespace qrisk
