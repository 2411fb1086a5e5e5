#include "lowering.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace qrisk {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void CouplingGraph::add_edge(uint32_t a, uint32_t b) {
    if (a == b) raise(ErrorCode::InvalidArgument, "self-loop in coupling graph");
    edges.insert({std::min(a, b), std::max(a, b)});
    num_qubits = std::max(num_qubits, std::max(a, b) + 1);
}

bool CouplingGraph::coupled(uint32_t a, uint32_t b) const {
    return edges.count({std::min(a, b), std::max(a, b)}) > 0;
}

Layout star_layout(uint32_t hub, const std::array<uint32_t, 3>& leaves,
                   uint32_t num_physical_qubits) {
    Layout layout;
    for (uint32_t leaf : leaves) layout.graph.add_edge(hub, leaf);
    if (num_physical_qubits > 0) {
        if (num_physical_qubits < layout.graph.num_qubits)
            raise(ErrorCode::InvalidArgument, "num_physical_qubits smaller than the layout needs");
        layout.graph.num_qubits = num_physical_qubits;
    }
    layout.logical_to_physical = {leaves[0], leaves[1], leaves[2], hub};
    std::set<uint32_t> distinct(layout.logical_to_physical.begin(),
                                layout.logical_to_physical.end());
    if (distinct.size() != 4)
        raise(ErrorCode::InvalidArgument, "star layout qubits must be distinct");
    return layout;
}

LogicalCircuit grover_circuit(const std::string& marked, uint32_t iterations) {
    if (marked.size() != 3 || marked.find_first_not_of("01") != std::string::npos)
        raise(ErrorCode::InvalidArgument, "marked state must be a 3-character bitstring");

    LogicalCircuit c;
    c.num_qubits = 4;
    const uint32_t anc = 3;
    auto add = [&c](LogicalGate kind, std::initializer_list<uint32_t> qs, double angle = 0.0) {
        c.ops.push_back({kind, angle, std::vector<uint32_t>(qs)});
    };
    // Phase flip of |111> on the data qubits, mediated by the ancilla:
    // compute q0&q1 into the workspace, controlled-Z against q2, uncompute.
    auto phase_flip_111 = [&] {
        add(LogicalGate::Ccx, {0, 1, anc});
        add(LogicalGate::H, {anc});
        add(LogicalGate::Cx, {2, anc});
        add(LogicalGate::H, {anc});
        add(LogicalGate::Ccx, {0, 1, anc});
    };

    for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::H, {q});
    for (uint32_t it = 0; it < iterations; ++it) {
        // Oracle: conjugate the zero bits of `marked` so the target maps to
        // |111>, flip its phase, undo.
        for (uint32_t q = 0; q < 3; ++q)
            if (marked[q] == '0') add(LogicalGate::X, {q});
        phase_flip_111();
        for (uint32_t q = 0; q < 3; ++q)
            if (marked[q] == '0') add(LogicalGate::X, {q});
        // Diffusion: reflect about the uniform superposition.
        for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::H, {q});
        for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::X, {q});
        phase_flip_111();
        for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::X, {q});
        for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::H, {q});
    }
    for (uint32_t q = 0; q < 3; ++q) add(LogicalGate::Measure, {q});
    return c;
}

namespace {

struct Emitter {
    const Layout& layout;
    Circuit out;

    uint32_t phys(uint32_t logical) const {
        if (logical >= layout.logical_to_physical.size())
            raise(ErrorCode::InvalidArgument,
                  "logical qubit " + std::to_string(logical) + " not in layout");
        return layout.logical_to_physical[logical];
    }

    void native(GateKind kind, std::initializer_list<uint32_t> phys_qubits, double angle = 0.0) {
        Operation op;
        op.kind = kind;
        op.angle = angle;
        op.qubits.assign(phys_qubits);
        out.ops.push_back(std::move(op));
    }

    void check_coupled(uint32_t pa, uint32_t pb) {
        if (!layout.graph.coupled(pa, pb))
            raise(ErrorCode::RoutingRequired,
                  "two-qubit gate needs uncoupled pair q" + std::to_string(pa) + ", q" +
                      std::to_string(pb) + " and routing is not supported");
    }

    void h(uint32_t p) {
        native(GateKind::Rz, {p}, kPi / 2);
        native(GateKind::Sx, {p});
        native(GateKind::Rz, {p}, kPi / 2);
    }

    void cz(uint32_t pa, uint32_t pb) {
        check_coupled(pa, pb);
        native(GateKind::Cz, {pa, pb});
    }

    void cx(uint32_t pc, uint32_t pt) {
        h(pt);
        cz(pc, pt);
        h(pt);
    }

    /// CCZ as a phase polynomial: RZ(pi/4) on parities a, b, t, a^b^t and
    /// RZ(-pi/4) on a^t, b^t, a^b, with the parities routed through CX gates
    /// that only ever touch pairs {a,t} and {b,t}.
    void ccz(uint32_t pa, uint32_t pb, uint32_t pt) {
        const double t = kPi / 4;
        native(GateKind::Rz, {pa}, t);
        native(GateKind::Rz, {pb}, t);
        native(GateKind::Rz, {pt}, t);
        cx(pa, pt); // T carries t^a
        native(GateKind::Rz, {pt}, -t);
        cx(pb, pt); // t^a^b
        native(GateKind::Rz, {pt}, t);
        cx(pa, pt); // t^b
        native(GateKind::Rz, {pt}, -t);
        cx(pb, pt); // t
        cx(pt, pa); // A carries a^t
        cx(pb, pt); // t^b
        cx(pt, pa); // a^b
        native(GateKind::Rz, {pa}, -t);
        cx(pt, pa); // a^t
        cx(pb, pt); // t
        cx(pt, pa); // a
    }

    void ccx(uint32_t pa, uint32_t pb, uint32_t pt) {
        h(pt);
        ccz(pa, pb, pt);
        h(pt);
    }
};

void merge_adjacent_rz(Circuit& circuit) {
    std::vector<Operation> merged;
    // last_on_qubit[q] = index into `merged` of the latest op touching q.
    std::vector<int64_t> last_on_qubit(circuit.num_physical_qubits, -1);
    for (const auto& op : circuit.ops) {
        if (op.kind == GateKind::Rz) {
            int64_t prev = last_on_qubit[op.qubits[0]];
            if (prev >= 0 && merged[size_t(prev)].kind == GateKind::Rz) {
                merged[size_t(prev)].angle += op.angle;
                continue;
            }
        }
        merged.push_back(op);
        for (uint32_t q : op.qubits) last_on_qubit[q] = int64_t(merged.size()) - 1;
    }
    circuit.ops = std::move(merged);
}

} // namespace

Circuit lower_to_native(const LogicalCircuit& logical, const Layout& layout,
                        const std::string& backend_id, const LowerOptions& options) {
    if (layout.logical_to_physical.size() < logical.num_qubits)
        raise(ErrorCode::InvalidArgument, "layout does not cover all logical qubits");
    Emitter em{layout, {}};
    em.out.backend_id = backend_id;
    em.out.num_physical_qubits = layout.graph.num_qubits;
    for (uint32_t p : layout.logical_to_physical)
        em.out.num_physical_qubits = std::max(em.out.num_physical_qubits, p + 1);

    for (const auto& op : logical.ops) {
        switch (op.kind) {
            case LogicalGate::H:
                em.h(em.phys(op.qubits[0]));
                break;
            case LogicalGate::X:
                em.native(GateKind::X, {em.phys(op.qubits[0])});
                break;
            case LogicalGate::Z:
                em.native(GateKind::Rz, {em.phys(op.qubits[0])}, kPi);
                break;
            case LogicalGate::Rz:
                em.native(GateKind::Rz, {em.phys(op.qubits[0])}, op.angle);
                break;
            case LogicalGate::Cx:
                em.cx(em.phys(op.qubits[0]), em.phys(op.qubits[1]));
                break;
            case LogicalGate::Ccx:
                em.ccx(em.phys(op.qubits[0]), em.phys(op.qubits[1]), em.phys(op.qubits[2]));
                break;
            case LogicalGate::Measure:
                em.native(GateKind::Measure, {em.phys(op.qubits[0])});
                break;
        }
    }
    if (options.merge_rz) merge_adjacent_rz(em.out);
    validate(em.out);
    return em.out;
}

} // namespace qrisk
