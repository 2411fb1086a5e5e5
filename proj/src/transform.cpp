#include "transform.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <json.hpp>

#include "error.hpp"
#include "sim.hpp"

namespace qrisk {

void to_json(nlohmann::json& j, const Circuit& circuit); // circuit.cpp

bool commutes(const Operation& a, const Operation& b) {
    const bool disjoint = std::none_of(a.qubits.begin(), a.qubits.end(), [&b](uint32_t q) {
        return std::find(b.qubits.begin(), b.qubits.end(), q) != b.qubits.end();
    });
    if (disjoint) return true;
    auto diagonal = [](GateKind k) { return k == GateKind::Rz || k == GateKind::Cz; };
    return diagonal(a.kind) && diagonal(b.kind);
}

Circuit swap_adjacent(const Circuit& circuit, uint32_t i, uint32_t j) {
    if (i > j) std::swap(i, j);
    if (j >= circuit.ops.size() || i == j)
        raise(ErrorCode::InvalidArgument, "swap needs two distinct op indices in range");
    const Operation& a = circuit.ops[i];
    const Operation& b = circuit.ops[j];

    if (j != i + 1) {
        std::vector<uint32_t> shared;
        for (uint32_t q : a.qubits)
            if (std::find(b.qubits.begin(), b.qubits.end(), q) != b.qubits.end())
                shared.push_back(q);
        if (shared.empty())
            raise(ErrorCode::InvalidArgument,
                  "ops are neither consecutive nor timeline-adjacent on a shared qubit");
        for (uint32_t k = i + 1; k < j; ++k)
            for (uint32_t q : shared)
                if (std::find(circuit.ops[k].qubits.begin(), circuit.ops[k].qubits.end(), q) !=
                    circuit.ops[k].qubits.end())
                    raise(ErrorCode::InvalidArgument,
                          "another op on a shared qubit sits between the pair");
    }
    if (!commutes(a, b))
        raise(ErrorCode::RejectedSwap, "ops share a qubit and are not both diagonal");

    // Sliding one op across the span must commute past everything it crosses.
    const bool forward = [&] {
        for (uint32_t k = i + 1; k < j; ++k)
            if (!commutes(a, circuit.ops[k])) return false;
        return true;
    }();
    Circuit out = circuit;
    if (forward) {
        std::rotate(out.ops.begin() + i, out.ops.begin() + i + 1, out.ops.begin() + j + 1);
    } else {
        const bool backward = [&] {
            for (uint32_t k = i + 1; k < j; ++k)
                if (!commutes(b, circuit.ops[k])) return false;
            return true;
        }();
        if (!backward)
            raise(ErrorCode::RejectedSwap,
                  "ops in between pin both gates; the exchange would not preserve semantics");
        std::rotate(out.ops.begin() + i, out.ops.begin() + j, out.ops.begin() + j + 1);
    }
    return out;
}

namespace {

/// Candidate exchange, ordered: RZ-moving swaps first, then by position.
struct SwapCandidate {
    bool moves_rz = false;
    uint32_t i = 0, j = 0;

    bool operator<(const SwapCandidate& other) const {
        if (moves_rz != other.moves_rz) return moves_rz > other.moves_rz;
        if (i != other.i) return i < other.i;
        return j < other.j;
    }
    bool operator==(const SwapCandidate& other) const { return i == other.i && j == other.j; }
};

std::vector<SwapCandidate> swap_candidates(const Circuit& circuit,
                                           const std::vector<uint32_t>& occ_ops) {
    const auto timelines = qubit_timelines(circuit);
    std::vector<SwapCandidate> cands;
    auto add = [&](int64_t i, int64_t j) {
        if (i < 0 || j < 0 || i >= int64_t(circuit.ops.size()) || j >= int64_t(circuit.ops.size()))
            return;
        if (i == j) return;
        if (i > j) std::swap(i, j);
        const bool rz = circuit.ops[size_t(i)].kind == GateKind::Rz ||
                        circuit.ops[size_t(j)].kind == GateKind::Rz;
        cands.push_back({rz, uint32_t(i), uint32_t(j)});
    };
    for (uint32_t m : occ_ops) {
        add(int64_t(m) - 1, m); // list neighbors
        add(m, int64_t(m) + 1);
        for (uint32_t q : circuit.ops[m].qubits) { // timeline neighbors
            const auto& line = timelines[q];
            const auto pos = std::find(line.begin(), line.end(), m);
            if (pos != line.begin()) add(*std::prev(pos), m);
            if (std::next(pos) != line.end()) add(m, *std::next(pos));
        }
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    return cands;
}

Circuit strip_measures(const Circuit& circuit) {
    Circuit out = circuit;
    out.ops.clear();
    for (const auto& op : circuit.ops)
        if (op.kind != GateKind::Measure) out.ops.push_back(op);
    return out;
}

} // namespace

TransformResult disrupt(const Circuit& circuit, const PatternDB& db,
                        const DisruptOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(circuit);

    TransformResult result;
    result.circuit = circuit;
    result.initial_occurrences = uint32_t(scan(circuit, db).size());
    const size_t moment_count = partition_into_moments(circuit).size();

    uint32_t broken = 0;
    bool progress = true;
    while (progress && broken < options.max_disruptions) {
        progress = false;
        const auto occs = scan(result.circuit, db);
        if (occs.empty()) break;
        // Ascending position order; ties by entry via scan's stable output.
        std::vector<const PatternOccurrence*> ordered;
        for (const auto& occ : occs) ordered.push_back(&occ);
        std::sort(ordered.begin(), ordered.end(),
                  [](const PatternOccurrence* a, const PatternOccurrence* b) {
                      return a->op_ids < b->op_ids;
                  });
        for (const PatternOccurrence* occ : ordered) {
            for (const SwapCandidate& cand : swap_candidates(result.circuit, occ->op_ids)) {
                if (!commutes(result.circuit.ops[cand.i], result.circuit.ops[cand.j])) continue;
                Circuit attempt;
                try {
                    attempt = swap_adjacent(result.circuit, cand.i, cand.j);
                } catch (const Error&) {
                    continue; // not adjacent or pinned; try the next candidate
                }
                if (partition_into_moments(attempt).size() != moment_count) continue;
                if (scan(attempt, db).size() >= occs.size()) continue;
                result.circuit = std::move(attempt);
                result.swaps_applied.emplace_back(cand.i, cand.j);
                ++broken;
                progress = true;
                break;
            }
            if (progress) break; // re-scan before touching further occurrences
        }
    }

    for (auto& occ : scan(result.circuit, db)) result.undisruptable.push_back(std::move(occ));
    result.disrupted = result.initial_occurrences - uint32_t(result.undisruptable.size());

    if (circuit.used_qubits().size() <= 6 && !result.swaps_applied.empty()) {
        const Unitary before = ideal_unitary(strip_measures(circuit));
        const Unitary after = ideal_unitary(strip_measures(result.circuit));
        if (unitary_distance(before, after) > 1e-9)
            raise(ErrorCode::Internal, "disruption changed the circuit unitary");
    }

    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string transform_result_to_json_str(const TransformResult& result, int indent) {
    nlohmann::json undisruptable = nlohmann::json::array();
    for (const auto& occ : result.undisruptable)
        undisruptable.push_back({{"entry_index", occ.entry_index}, {"op_ids", occ.op_ids}});
    nlohmann::json swaps = nlohmann::json::array();
    for (const auto& [i, j] : result.swaps_applied) swaps.push_back({i, j});
    nlohmann::json j{{"circuit", result.circuit},
                     {"initial_occurrences", result.initial_occurrences},
                     {"disrupted", result.disrupted},
                     {"undisruptable", undisruptable},
                     {"swaps_applied", swaps},
                     {"meta", nlohmann::json{{"elapsed_ms", result.elapsed_ms}}}};
    return j.dump(indent);
}

} // namespace qrisk
