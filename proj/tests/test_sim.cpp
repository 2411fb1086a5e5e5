#include <doctest.h>

#include <cmath>

#include "circuit.hpp"
#include "error.hpp"
#include "sim.hpp"

using namespace qrisk;

namespace {

Circuit one_qubit(std::initializer_list<Operation> gates) {
    Circuit c;
    c.backend_id = "dev";
    c.num_physical_qubits = 1;
    c.ops = gates;
    c.ops.push_back({GateKind::Measure, 0.0, {0}});
    return c;
}

} // namespace

TEST_CASE("total variation distance") {
    Distribution a{{0}, {{"0", 0.5}, {"1", 0.5}}, 0};
    Distribution b{{0}, {{"0", 0.75}, {"1", 0.25}}, 0};
    CHECK(tvd(a, b) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(tvd(a, a) == doctest::Approx(0.0));

    // Disjoint supports count fully.
    Distribution c{{0}, {{"0", 1.0}}, 0};
    Distribution d{{0}, {{"1", 1.0}}, 0};
    CHECK(tvd(c, d) == doctest::Approx(1.0));

    Distribution other{{1}, {{"0", 1.0}}, 0};
    CHECK_THROWS_AS(tvd(a, other), Error);
}

TEST_CASE("ideal distribution of simple circuits") {
    const Circuit flip = one_qubit({{GateKind::X, 0.0, {0}}});
    auto d = ideal_distribution(flip);
    CHECK(d.probs.at("1") == doctest::Approx(1.0).epsilon(1e-12));

    const Circuit half = one_qubit({{GateKind::Sx, 0.0, {0}}});
    auto h = ideal_distribution(half);
    CHECK(h.probs.at("0") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h.probs.at("1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sx twice equals x up to global phase; rz angles add") {
    Circuit sxsx;
    sxsx.num_physical_qubits = 1;
    sxsx.ops = {{GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}};
    Circuit x;
    x.num_physical_qubits = 1;
    x.ops = {{GateKind::X, 0.0, {0}}};
    CHECK(unitary_distance(ideal_unitary(sxsx), ideal_unitary(x)) < 1e-12);

    Circuit two_rz;
    two_rz.num_physical_qubits = 1;
    two_rz.ops = {{GateKind::Rz, 0.3, {0}}, {GateKind::Rz, 0.9, {0}}};
    Circuit one_rz;
    one_rz.num_physical_qubits = 1;
    one_rz.ops = {{GateKind::Rz, 1.2, {0}}};
    CHECK(unitary_distance(ideal_unitary(two_rz), ideal_unitary(one_rz)) < 1e-12);
}

TEST_CASE("unitary extraction guards") {
    Circuit measured = one_qubit({{GateKind::X, 0.0, {0}}});
    CHECK_THROWS_AS(ideal_unitary(measured), Error);
}

TEST_CASE("noise model validation") {
    NoiseModel nm;
    CHECK_NOTHROW(validate(nm));
    SUBCASE("probability range") {
        nm.sx.p = 1.5;
        CHECK_THROWS_AS(validate(nm), Error);
    }
    SUBCASE("t2 bound") {
        nm.qubits[0] = QubitNoise{100.0, 300.0, 0.0, 0.0};
        CHECK_THROWS_AS(validate(nm), Error);
    }
    SUBCASE("readout range") {
        nm.qubits[0] = QubitNoise{100.0, 100.0, -0.1, 0.0};
        CHECK_THROWS_AS(validate(nm), Error);
    }
}

TEST_CASE("noise model json round-trip") {
    NoiseModel nm;
    nm.sx = {1e-4, 32.0};
    nm.cz = {5e-4, 68.0};
    nm.qubits[7] = QubitNoise{800000.0, 600000.0, 0.04, 0.03};
    const NoiseModel back = noise_model_from_json_str(noise_model_to_json_str(nm));
    CHECK(back.sx.p == nm.sx.p);
    CHECK(back.cz.duration == nm.cz.duration);
    CHECK(back.qubit(7).t2 == nm.qubit(7).t2);
    CHECK(back.qubit(7).ro10 == nm.qubit(7).ro10);
    CHECK_THROWS_AS(noise_model_from_json_str("nope"), Error);
}

TEST_CASE("full depolarizing after x leaves two thirds in zero") {
    // Uniform non-identity Pauli on |1>: X and Y restore |0>, Z keeps |1>.
    NoiseModel nm;
    nm.x = {1.0, 0.0};
    const Circuit c = one_qubit({{GateKind::X, 0.0, {0}}});
    auto d = noisy_sample(c, nm, 60000, 4242);
    CHECK(d.probs.at("0") == doctest::Approx(2.0 / 3.0).epsilon(0.02));
    CHECK(d.probs.at("1") == doctest::Approx(1.0 / 3.0).epsilon(0.04));
}

TEST_CASE("amplitude damping over one T1 during readout") {
    NoiseModel nm;
    nm.measure_duration = 1000.0;
    nm.qubits[0] = QubitNoise{1000.0, 2000.0, 0.0, 0.0};
    const Circuit c = one_qubit({{GateKind::X, 0.0, {0}}});
    auto d = noisy_sample(c, nm, 60000, 99);
    CHECK(d.probs.at("1") == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
}

TEST_CASE("readout flip probability shows up directly") {
    NoiseModel nm;
    nm.qubits[0] = QubitNoise{1e18, 1e18, 0.1, 0.0};
    const Circuit c = one_qubit({});
    auto d = noisy_sample(c, nm, 60000, 7);
    CHECK(d.probs.at("1") == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("sampling is deterministic in the seed and schedule independent") {
    NoiseModel nm;
    nm.sx = {0.01, 32.0};
    nm.qubits[0] = QubitNoise{80000.0, 60000.0, 0.02, 0.02};
    const Circuit c = one_qubit({{GateKind::Sx, 0.0, {0}}});
    auto a = noisy_sample(c, nm, 4096, 123);
    auto b = noisy_sample(c, nm, 4096, 123);
    CHECK(a.probs == b.probs);
    auto other = noisy_sample(c, nm, 4096, 124);
    CHECK(a.probs != other.probs);

    // Same trajectories batched across a different worker count.
    set_worker_threads(3);
    auto threaded = noisy_sample(c, nm, 4096, 123);
    set_worker_threads(1);
    CHECK(threaded.probs == a.probs);
}

TEST_CASE("shot noise floor between independent samples") {
    // Three-qubit skewed 8-outcome distribution: the TVD between two
    // independent finite-shot estimates sits near its analytic floor.
    NoiseModel nm;
    nm.x = {0.01, 32.0};
    for (uint32_t q : {0u, 1u, 2u}) nm.qubits[q] = QubitNoise{1e18, 1e18, 0.01, 0.01};
    Circuit c;
    c.backend_id = "dev";
    c.num_physical_qubits = 3;
    for (uint32_t q : {0u, 1u, 2u}) c.ops.push_back({GateKind::X, 0.0, {q}});
    for (uint32_t q : {0u, 1u, 2u}) c.ops.push_back({GateKind::Measure, 0.0, {q}});

    double total = 0.0;
    const int pairs = 5;
    for (int i = 0; i < pairs; ++i) {
        auto a = noisy_sample(c, nm, 8192, 1000 + 2 * i);
        auto b = noisy_sample(c, nm, 8192, 1001 + 2 * i);
        total += tvd(a, b);
    }
    const double avg = total / pairs;
    CHECK(avg > 0.002);
    CHECK(avg < 0.013);
}

TEST_CASE("sampler input guards") {
    NoiseModel nm;
    Circuit no_measure;
    no_measure.num_physical_qubits = 1;
    no_measure.ops = {{GateKind::X, 0.0, {0}}};
    CHECK_THROWS_AS(noisy_sample(no_measure, nm, 16, 1), Error);
    const Circuit c = one_qubit({});
    CHECK_THROWS_AS(noisy_sample(c, nm, 0, 1), Error);
}
