#include "match.hpp"

#include <algorithm>
#include <map>

#include "error.hpp"

namespace qrisk {

namespace {

struct Matcher {
    const Circuit& circuit;
    const GateTemplate& tmpl;
    const std::vector<uint32_t>& binding;
    std::vector<std::vector<uint32_t>> timelines;
    // (qubit, op id) -> position of the op on that qubit's timeline.
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> timeline_pos;
    std::vector<uint32_t> assigned;

    Matcher(const Circuit& c, const GateTemplate& t, const std::vector<uint32_t>& b)
        : circuit(c), tmpl(t), binding(b) {
        timelines = qubit_timelines(circuit);
        for (uint32_t q = 0; q < timelines.size(); ++q)
            for (uint32_t i = 0; i < timelines[q].size(); ++i)
                timeline_pos[{q, timelines[q][i]}] = i;
    }

    bool step_matches(uint32_t op_id, const TemplateStep& step) const {
        const Operation& op = circuit.ops[op_id];
        if (op.kind != step.kind) return false;
        if (op.qubits.size() != step.roles.size()) return false;
        if (op.kind == GateKind::Cz) {
            uint32_t a = binding[step.roles[0]];
            uint32_t b = binding[step.roles[1]];
            return (op.qubits[0] == a && op.qubits[1] == b) ||
                   (op.qubits[0] == b && op.qubits[1] == a);
        }
        for (size_t i = 0; i < step.roles.size(); ++i)
            if (op.qubits[i] != binding[step.roles[i]]) return false;
        return true;
    }

    /// The op assigned to a step sharing qubit q with an earlier assigned op
    /// must be that op's immediate successor on q's timeline.
    bool contiguous_with_assigned(uint32_t op_id) const {
        for (uint32_t q : circuit.ops[op_id].qubits) {
            int64_t last = -1;
            for (uint32_t prev : assigned) {
                const auto& pq = circuit.ops[prev].qubits;
                if (std::find(pq.begin(), pq.end(), q) != pq.end())
                    last = std::max<int64_t>(last, prev);
            }
            if (last < 0) continue;
            uint32_t pos = timeline_pos.at({q, uint32_t(last)});
            const auto& tl = timelines[q];
            if (pos + 1 >= tl.size() || tl[pos + 1] != op_id) return false;
        }
        return true;
    }

    bool extend(size_t step_index) {
        if (step_index == tmpl.steps.size()) return true;
        const TemplateStep& step = tmpl.steps[step_index];
        uint32_t from = assigned.empty() ? 0 : assigned.back() + 1;
        for (uint32_t id = from; id < circuit.ops.size(); ++id) {
            if (!step_matches(id, step)) continue;
            if (!contiguous_with_assigned(id)) continue;
            assigned.push_back(id);
            if (extend(step_index + 1)) return true;
            assigned.pop_back();
        }
        return false;
    }
};

} // namespace

std::vector<std::vector<uint32_t>> find_occurrences(const Circuit& circuit,
                                                    const GateTemplate& tmpl,
                                                    const std::vector<uint32_t>& binding) {
    if (tmpl.steps.empty())
        raise(ErrorCode::InvalidArgument, "empty gate template");
    for (const auto& step : tmpl.steps) {
        if (step.roles.empty() || step.roles.size() > 2)
            raise(ErrorCode::InvalidArgument, "template step arity must be 1 or 2");
        for (uint32_t role : step.roles)
            if (role >= binding.size())
                raise(ErrorCode::InvalidArgument, "template role exceeds binding size");
    }

    Matcher matcher(circuit, tmpl, binding);
    std::vector<std::vector<uint32_t>> occurrences;
    for (uint32_t start = 0; start < circuit.ops.size(); ++start) {
        if (!matcher.step_matches(start, tmpl.steps[0])) continue;
        matcher.assigned.assign(1, start);
        if (matcher.extend(1)) occurrences.push_back(matcher.assigned);
    }
    return occurrences;
}

} // namespace qrisk
