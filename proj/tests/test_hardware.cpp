#include <doctest.h>

#include "error.hpp"
#include "hardware.hpp"
#include "match.hpp"
#include "sim.hpp"

using namespace qrisk;

namespace {

BackendSpec tiny_spec(double excess = 0.0) {
    BackendSpec spec;
    spec.backend_id = "mock_tiny";
    spec.graph.num_qubits = 3;
    spec.graph.add_edge(0, 1);
    spec.graph.add_edge(1, 2);
    spec.base_calibration.sx = {1e-4, 32.0};
    spec.base_calibration.x = {1e-4, 32.0};
    spec.base_calibration.cz = {5e-4, 68.0};
    for (uint32_t q : {0u, 1u, 2u})
        spec.base_calibration.qubits[q] = QubitNoise{800000.0, 600000.0, 0.02, 0.02};
    if (excess > 0.0) {
        ContextRule rule;
        rule.tmpl.steps = {{GateKind::Sx, {0}}, {GateKind::Sx, {0}}, {GateKind::Cz, {0, 1}}};
        rule.binding = {0, 1};
        rule.excess = excess;
        spec.hidden_rules.push_back(rule);
    }
    return spec;
}

Circuit pattern_circuit(const std::string& backend_id) {
    Circuit c;
    c.backend_id = backend_id;
    c.num_physical_qubits = 3;
    c.ops = {{GateKind::Sx, 0.0, {0}},      {GateKind::Sx, 0.0, {0}},
             {GateKind::Cz, 0.0, {0, 1}},   {GateKind::Measure, 0.0, {0}},
             {GateKind::Measure, 0.0, {1}}};
    return c;
}

} // namespace

TEST_CASE("context rule validation") {
    ContextRule rule;
    rule.tmpl.steps = {{GateKind::Sx, {0}}, {GateKind::Cz, {0, 1}}};
    rule.binding = {0, 1};
    rule.excess = 0.05;
    CHECK_NOTHROW(validate(rule));
    SUBCASE("excess range") {
        rule.excess = 0.0;
        CHECK_THROWS_AS(validate(rule), Error);
        rule.excess = 1.5;
        CHECK_THROWS_AS(validate(rule), Error);
    }
    SUBCASE("binding arity") {
        rule.binding = {0};
        CHECK_THROWS_AS(validate(rule), Error);
    }
    SUBCASE("measure steps are not rules") {
        rule.tmpl.steps.push_back({GateKind::Measure, {0}});
        CHECK_THROWS_AS(validate(rule), Error);
    }
}

TEST_CASE("backend spec json round-trip") {
    const BackendSpec spec = tiny_spec(0.07);
    const BackendSpec back = backend_spec_from_json_str(backend_spec_to_json_str(spec));
    CHECK(back.backend_id == spec.backend_id);
    CHECK(back.graph.edges == spec.graph.edges);
    CHECK(back.graph.num_qubits == spec.graph.num_qubits);
    CHECK(back.hidden_rules == spec.hidden_rules);
    CHECK(back.drift == spec.drift);
    CHECK(back.base_calibration.cz.p == spec.base_calibration.cz.p);
    CHECK_THROWS_AS(backend_spec_from_json_str("{"), Error);
}

TEST_CASE("windows are deterministic and drift apart") {
    BackendSpec spec = tiny_spec();
    spec.drift.sigma_mult = 0.1;

    const CalibrationWindow w0a = open_window(spec, 0, 555);
    const CalibrationWindow w0b = open_window(spec, 0, 555);
    CHECK(noise_model_to_json_str(w0a.realized_calibration) ==
          noise_model_to_json_str(w0b.realized_calibration));
    CHECK(w0a.seed == w0b.seed);

    const CalibrationWindow w1 = open_window(spec, 1, 555);
    CHECK(w1.seed != w0a.seed);
    CHECK(noise_model_to_json_str(w1.realized_calibration) !=
          noise_model_to_json_str(w0a.realized_calibration));

    // Jitter is multiplicative and small at sigma 0.1: every realized scalar
    // stays within a factor of two of its base value.
    for (uint32_t idx = 0; idx < 8; ++idx) {
        const auto w = open_window(spec, idx, 999);
        const double base = spec.base_calibration.cz.p;
        CHECK(w.realized_calibration.cz.p > base / 2.0);
        CHECK(w.realized_calibration.cz.p < base * 2.0);
        const QubitNoise qn = w.realized_calibration.qubit(1);
        CHECK(qn.ro01 > 0.01);
        CHECK(qn.ro01 < 0.04);
        CHECK(qn.t2 <= 2.0 * qn.t1 + 1e-6);
    }
}

TEST_CASE("zero drift reproduces the base calibration") {
    const BackendSpec spec = tiny_spec();
    const CalibrationWindow w = open_window(spec, 3, 17);
    CHECK(noise_model_to_json_str(w.realized_calibration) ==
          noise_model_to_json_str(spec.base_calibration));
}

TEST_CASE("exported calibration carries no rule information") {
    BackendSpec spec = tiny_spec(0.25);
    const CalibrationWindow w = open_window(spec, 0, 1);
    REQUIRE(w.realized_rules.size() == 1);
    const NoiseModel exported = export_calibration(w);
    // The exported model equals the realized one (rules live elsewhere)...
    CHECK(noise_model_to_json_str(exported) == noise_model_to_json_str(w.realized_calibration));
    // ...and matches what a rule-free twin of the backend would export.
    BackendSpec clean = tiny_spec();
    const NoiseModel clean_exported = export_calibration(open_window(clean, 0, 1));
    CHECK(noise_model_to_json_str(exported) == noise_model_to_json_str(clean_exported));
}

TEST_CASE("execution without any rule occurrence equals plain simulation") {
    const BackendSpec spec = tiny_spec(0.25);
    const CalibrationWindow w = open_window(spec, 0, 90);
    Circuit c = pattern_circuit(spec.backend_id);
    c.ops[1] = {GateKind::X, 0.0, {0}}; // break the sx-sx pair: no occurrence
    const auto hw = execute_on_window(c, w, 2048, 31);
    const auto sim = noisy_sample(c, export_calibration(w), 2048, 31);
    CHECK(hw.probs == sim.probs);
}

TEST_CASE("a firing rule displaces measurement mass") {
    const BackendSpec spec = tiny_spec(0.5);
    const CalibrationWindow w = open_window(spec, 0, 90);
    const Circuit c = pattern_circuit(spec.backend_id);
    const auto hw = execute_on_window(c, w, 8192, 31);
    const auto sim = noisy_sample(c, export_calibration(w), 8192, 31);
    // sx.sx = X on qubit 0: ideally "10". A 0.5-depolarizing fire on both
    // bound qubits moves ~ 3/8 of the mass off the ideal outcome.
    CHECK(tvd(hw, sim) > 0.2);
    CHECK(hw.probs.at("10") < sim.probs.at("10") - 0.2);
}

TEST_CASE("rule occurrence relation matches the template matcher") {
    const BackendSpec spec = tiny_spec(0.1);
    Circuit c = pattern_circuit(spec.backend_id);
    c.ops.insert(c.ops.begin() + 3, {GateKind::Sx, 0.0, {0}});
    c.ops.insert(c.ops.begin() + 4, {GateKind::Sx, 0.0, {0}});
    c.ops.insert(c.ops.begin() + 5, {GateKind::Cz, 0.0, {1, 0}});
    const ContextRule& rule = spec.hidden_rules[0];
    CHECK(rule_occurrences(c, rule) == find_occurrences(c, rule.tmpl, rule.binding));
    CHECK(rule_occurrences(c, rule).size() == 2);
}

TEST_CASE("transient rules appear only in their window") {
    BackendSpec spec = tiny_spec();
    spec.drift.transient_prob = 1.0;
    const CalibrationWindow w = open_window(spec, 0, 7);
    REQUIRE(w.realized_rules.size() == 1);
    CHECK(w.realized_rules[0].excess >= spec.drift.transient_excess_min - 1e-12);
    CHECK(w.realized_rules[0].excess <= spec.drift.transient_excess_max + 1e-12);
    // Deterministic per (spec, window, seed).
    const CalibrationWindow again = open_window(spec, 0, 7);
    CHECK(again.realized_rules == w.realized_rules);

    spec.drift.transient_prob = 0.0;
    CHECK(open_window(spec, 0, 7).realized_rules.empty());
}

TEST_CASE("backend spec validation") {
    BackendSpec spec = tiny_spec(0.1);
    CHECK_NOTHROW(validate(spec));
    SUBCASE("rule binding must fit the device") {
        spec.hidden_rules[0].binding = {0, 9};
        CHECK_THROWS_AS(validate(spec), Error);
    }
    SUBCASE("empty backend id") {
        spec.backend_id.clear();
        CHECK_THROWS_AS(validate(spec), Error);
    }
}
