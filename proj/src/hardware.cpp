#include "hardware.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace qrisk {

// Defined alongside the noise-model JSON helpers in sim.cpp.
void to_json(nlohmann::json& j, const NoiseModel& model);
void from_json(const nlohmann::json& j, NoiseModel& model);

void validate(const ContextRule& rule) {
    if (rule.tmpl.steps.size() < 2)
        raise(ErrorCode::InvalidArgument, "context rule template needs at least 2 steps");
    if (!(rule.excess > 0.0 && rule.excess <= 1.0))
        raise(ErrorCode::InvalidArgument, "context rule excess must be in (0, 1]");
    if (rule.binding.empty() || rule.binding.size() > 2)
        raise(ErrorCode::InvalidArgument,
              "context rule binds 1 or 2 qubits (the excess channel is 1- or 2-qubit)");
    std::set<uint32_t> distinct(rule.binding.begin(), rule.binding.end());
    if (distinct.size() != rule.binding.size())
        raise(ErrorCode::InvalidArgument, "context rule binding qubits must be distinct");
    for (const auto& step : rule.tmpl.steps) {
        const size_t arity = step.kind == GateKind::Cz ? 2 : 1;
        if (step.kind == GateKind::Measure)
            raise(ErrorCode::InvalidArgument, "context rule templates cover gates, not measurements");
        if (step.roles.size() != arity)
            raise(ErrorCode::InvalidArgument, std::string("template step ") + gate_name(step.kind) +
                                                  " has wrong role count");
        for (uint32_t role : step.roles)
            if (role >= rule.binding.size())
                raise(ErrorCode::InvalidArgument, "template role outside the binding tuple");
        if (arity == 2 && step.roles[0] == step.roles[1])
            raise(ErrorCode::InvalidArgument, "cz step needs two distinct roles");
    }
}

void validate(const BackendSpec& spec) {
    if (spec.backend_id.empty())
        raise(ErrorCode::InvalidArgument, "backend spec needs a backend_id");
    if (spec.graph.num_qubits == 0)
        raise(ErrorCode::InvalidArgument, "backend spec needs at least one qubit");
    validate(spec.base_calibration);
    for (const auto& rule : spec.hidden_rules) {
        validate(rule);
        for (uint32_t q : rule.binding)
            if (q >= spec.graph.num_qubits)
                raise(ErrorCode::InvalidArgument,
                      "rule binding qubit q" + std::to_string(q) + " outside the backend");
    }
    if (!(spec.drift.sigma_mult >= 0.0))
        raise(ErrorCode::InvalidArgument, "drift sigma_mult must be >= 0");
    if (!(spec.drift.transient_prob >= 0.0 && spec.drift.transient_prob <= 1.0))
        raise(ErrorCode::InvalidArgument, "transient_prob must be in [0, 1]");
    if (!(spec.drift.transient_excess_min > 0.0 &&
          spec.drift.transient_excess_min <= spec.drift.transient_excess_max &&
          spec.drift.transient_excess_max <= 1.0))
        raise(ErrorCode::InvalidArgument, "transient excess range must satisfy 0 < min <= max <= 1");
}

// --- JSON ---------------------------------------------------------------

static void to_json(nlohmann::json& j, const TemplateStep& step) {
    j = nlohmann::json{{"kind", gate_name(step.kind)}, {"roles", step.roles}};
}

static void from_json(const nlohmann::json& j, TemplateStep& step) {
    step.kind = gate_from_name(j.at("kind").get<std::string>());
    step.roles = j.at("roles").get<std::vector<uint32_t>>();
}

static void to_json(nlohmann::json& j, const ContextRule& rule) {
    j = nlohmann::json{{"template", rule.tmpl.steps},
                       {"binding", rule.binding},
                       {"excess", rule.excess}};
}

static void from_json(const nlohmann::json& j, ContextRule& rule) {
    rule.tmpl.steps = j.at("template").get<std::vector<TemplateStep>>();
    rule.binding = j.at("binding").get<std::vector<uint32_t>>();
    rule.excess = j.at("excess").get<double>();
}

std::string backend_spec_to_json_str(const BackendSpec& spec, int indent) {
    nlohmann::json coupling = nlohmann::json::array();
    for (const auto& [a, b] : spec.graph.edges) coupling.push_back({a, b});
    nlohmann::json nm;
    to_json(nm, spec.base_calibration);
    nlohmann::json j{
        {"backend_id", spec.backend_id},
        {"num_qubits", spec.graph.num_qubits},
        {"coupling", coupling},
        {"base_calibration", nm},
        {"hidden_rules", spec.hidden_rules},
        {"drift",
         {{"sigma_mult", spec.drift.sigma_mult},
          {"transient_prob", spec.drift.transient_prob},
          {"transient_excess", {spec.drift.transient_excess_min, spec.drift.transient_excess_max}}}}};
    return j.dump(indent);
}

BackendSpec backend_spec_from_json_str(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("backend spec: ") + e.what());
    }
    BackendSpec spec;
    try {
        spec.backend_id = j.at("backend_id").get<std::string>();
        spec.graph.num_qubits = j.at("num_qubits").get<uint32_t>();
        for (const auto& edge : j.at("coupling")) {
            if (!edge.is_array() || edge.size() != 2)
                raise(ErrorCode::ParseError, "coupling entries must be [a, b] pairs");
            spec.graph.add_edge(edge[0].get<uint32_t>(), edge[1].get<uint32_t>());
        }
        from_json(j.at("base_calibration"), spec.base_calibration);
        if (j.contains("hidden_rules"))
            spec.hidden_rules = j.at("hidden_rules").get<std::vector<ContextRule>>();
        if (j.contains("drift")) {
            const auto& d = j.at("drift");
            spec.drift.sigma_mult = d.value("sigma_mult", 0.0);
            spec.drift.transient_prob = d.value("transient_prob", 0.0);
            if (d.contains("transient_excess")) {
                spec.drift.transient_excess_min = d.at("transient_excess").at(0).get<double>();
                spec.drift.transient_excess_max = d.at("transient_excess").at(1).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("backend spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

// --- Window realization ---------------------------------------------------

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

/// One transient: a 2-step template over the native gate alphabet, bound to a
/// random coupled pair. Both steps touch role 0 so occurrences are forced to
/// be timeline-contiguous (a free-floating disjoint pair would match
/// quadratically many op pairs).
ContextRule make_transient_rule(const BackendSpec& spec, Rng& rng) {
    static const GateKind alphabet[] = {GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cz};
    ContextRule rule;
    for (int s = 0; s < 2; ++s) {
        TemplateStep step;
        step.kind = alphabet[rng.below(4)];
        step.roles = step.kind == GateKind::Cz ? std::vector<uint32_t>{0, 1}
                                               : std::vector<uint32_t>{0};
        rule.tmpl.steps.push_back(std::move(step));
    }
    uint32_t a = 0, b = 1;
    if (!spec.graph.edges.empty()) {
        auto it = spec.graph.edges.begin();
        std::advance(it, long(rng.below(spec.graph.edges.size())));
        a = it->first;
        b = it->second;
        if (rng.below(2)) std::swap(a, b);
    }
    const bool needs_pair = std::any_of(rule.tmpl.steps.begin(), rule.tmpl.steps.end(),
                                        [](const TemplateStep& s) { return s.roles.size() == 2; });
    rule.binding = needs_pair ? std::vector<uint32_t>{a, b} : std::vector<uint32_t>{a};
    rule.excess = spec.drift.transient_excess_min +
                  rng.uniform() * (spec.drift.transient_excess_max - spec.drift.transient_excess_min);
    return rule;
}

} // namespace

CalibrationWindow open_window(const BackendSpec& spec, uint32_t window_index,
                              uint64_t master_seed) {
    validate(spec);
    CalibrationWindow window;
    window.backend_id = spec.backend_id;
    window.num_physical_qubits = spec.graph.num_qubits;
    window.window_id = window_index;
    window.seed = hash_mix({master_seed, window_index});
    Rng rng(window.seed);

    const double sigma = spec.drift.sigma_mult;
    auto jitter = [&rng, sigma](double value) { return value * rng.lognormal_jitter(sigma); };

    // Fixed realization order: gate error rates, then per-qubit scalars in
    // ascending qubit index. Durations are hardware constants and stay put.
    NoiseModel realized = spec.base_calibration;
    realized.rz.p = clamp01(jitter(realized.rz.p));
    realized.sx.p = clamp01(jitter(realized.sx.p));
    realized.x.p = clamp01(jitter(realized.x.p));
    realized.cz.p = clamp01(jitter(realized.cz.p));
    for (auto& [q, qn] : realized.qubits) { // std::map: ascending qubit order
        if (std::isfinite(qn.t1)) qn.t1 = jitter(qn.t1);
        if (std::isfinite(qn.t2)) qn.t2 = jitter(qn.t2);
        if (std::isfinite(qn.t1) && qn.t2 > 2.0 * qn.t1) qn.t2 = 2.0 * qn.t1;
        qn.ro01 = clamp01(jitter(qn.ro01));
        qn.ro10 = clamp01(jitter(qn.ro10));
    }
    window.realized_calibration = std::move(realized);

    window.realized_rules = spec.hidden_rules;
    if (rng.uniform() < spec.drift.transient_prob)
        window.realized_rules.push_back(make_transient_rule(spec, rng));
    return window;
}

std::vector<std::vector<uint32_t>> rule_occurrences(const Circuit& circuit,
                                                    const ContextRule& rule) {
    validate(rule);
    return find_occurrences(circuit, rule.tmpl, rule.binding);
}

namespace {

/// Everything the per-trajectory hook needs, precomputed once per execution.
struct FirePlan {
    struct Shot {
        std::vector<uint32_t> locals; ///< bound qubits as simulator-local indices
        double excess;
    };
    // fires[op_id] = channels triggered right after that op.
    std::map<uint32_t, std::vector<Shot>> fires;

    static void hook(void* ctx, uint32_t op_id, Rng& rng, detail::TrajectoryState& state) {
        const auto& plan = *static_cast<const FirePlan*>(ctx);
        auto it = plan.fires.find(op_id);
        if (it == plan.fires.end()) return;
        for (const auto& shot : it->second)
            if (rng.uniform() < shot.excess) state.depolarize(shot.locals, rng);
    }
};

} // namespace

Distribution execute_on_window(const Circuit& circuit, const CalibrationWindow& window,
                               uint32_t shots, uint64_t seed) {
    validate(circuit);
    for (uint32_t q : circuit.used_qubits())
        if (q >= window.num_physical_qubits)
            raise(ErrorCode::InvalidArgument,
                  "circuit uses q" + std::to_string(q) + " which the backend does not have");

    FirePlan plan;
    // Local indices follow the compaction the simulator applies: sorted used
    // qubits, position = local index.
    const auto used_set = circuit.used_qubits();
    const std::vector<uint32_t> used(used_set.begin(), used_set.end());
    auto local_of = [&used](uint32_t q) {
        return uint32_t(std::lower_bound(used.begin(), used.end(), q) - used.begin());
    };
    for (const auto& rule : window.realized_rules) {
        std::vector<uint32_t> locals;
        bool bound_in_circuit = true;
        for (uint32_t q : rule.binding) {
            if (!std::binary_search(used.begin(), used.end(), q)) {
                bound_in_circuit = false;
                break;
            }
            locals.push_back(local_of(q));
        }
        if (!bound_in_circuit) continue; // rule cannot occur in this circuit
        for (const auto& occ : rule_occurrences(circuit, rule))
            plan.fires[occ.back()].push_back({locals, rule.excess});
    }

    return detail::sample_trajectories(circuit, window.realized_calibration, shots, seed,
                                       plan.fires.empty() ? nullptr : &FirePlan::hook, &plan);
}

NoiseModel export_calibration(const CalibrationWindow& window) {
    return window.realized_calibration;
}

} // namespace qrisk
