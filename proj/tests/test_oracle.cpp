#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "oracle.hpp"
#include "sim.hpp"

using namespace qrisk;

namespace {

Circuit coin_circuit() {
    Circuit c;
    c.backend_id = "mock_tiny";
    c.num_physical_qubits = 2;
    c.ops.push_back({GateKind::Sx, 0.0, {0}});
    c.ops.push_back({GateKind::Measure, 0.0, {0}});
    return c;
}

Circuit bitflip_circuit() {
    Circuit c;
    c.backend_id = "mock_tiny";
    c.num_physical_qubits = 2;
    c.ops.push_back({GateKind::X, 0.0, {0}});
    c.ops.push_back({GateKind::Measure, 0.0, {0}});
    return c;
}

NoiseModel modest_noise() {
    NoiseModel nm;
    nm.sx = {1e-3, 32.0};
    nm.x = {1e-3, 32.0};
    nm.cz = {5e-3, 68.0};
    nm.measure_duration = 1000.0;
    nm.qubits[0] = QubitNoise{100000.0, 80000.0, 0.02, 0.02};
    nm.qubits[1] = QubitNoise{100000.0, 80000.0, 0.02, 0.02};
    return nm;
}

Executor executor_for(const NoiseModel& nm) {
    return [nm](const Circuit& c, uint32_t shots, uint64_t seed) {
        return noisy_sample(c, nm, shots, seed);
    };
}

double sample_std(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= double(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / double(xs.size() - 1));
}

} // namespace

TEST_CASE("oracle config validation") {
    OracleConfig cfg;
    CHECK_NOTHROW(validate(cfg));

    SUBCASE("zero shots") {
        cfg.shots = 0;
        CHECK_THROWS_AS(validate(cfg), Error);
    }
    SUBCASE("single null run cannot yield a spread") {
        cfg.null_runs = 1;
        CHECK_THROWS_AS(validate(cfg), Error);
    }
    SUBCASE("sigma multiplier must be positive") {
        cfg.sigma_multiplier = 0.0;
        CHECK_THROWS_AS(validate(cfg), Error);
    }
    SUBCASE("floor multiplier must be positive") {
        cfg.floor_multiplier = -1.0;
        CHECK_THROWS_AS(validate(cfg), Error);
    }
}

TEST_CASE("drop and sufficient checks against a fixed threshold") {
    // Threshold for null ratios {1.0, 1.1, 0.9, 1.05, 0.95} at two sigma:
    // mean 1.0, sample std 0.0790569, tau = 1.0 + 2*0.0790569 - 1.
    OracleCalibration cal;
    cal.tau = 0.15811388300841903;
    cal.tvd_min = 0.01;
    cal.null_ratios = {1.0, 1.1, 0.9, 1.05, 0.95};

    RatioMeasurement m;
    m.denominator_ok = true;

    SUBCASE("sufficient requires R above 1 + tau") {
        m.R = 1.20;
        CHECK(sufficient_check(m, cal));
        m.R = 1.10;
        CHECK_FALSE(sufficient_check(m, cal));
        m.R = 1.0 + cal.tau; // boundary is strict
        CHECK_FALSE(sufficient_check(m, cal));
    }
    SUBCASE("sufficient never fires on a starved denominator") {
        m.R = 5.0;
        m.denominator_ok = false;
        CHECK_FALSE(sufficient_check(m, cal));
    }
    SUBCASE("drop requires the reduction to exceed tau") {
        m.R = 1.30;
        CHECK(drop_check(1.50, m, cal));       // drop of 0.20
        CHECK_FALSE(drop_check(1.40, m, cal)); // drop of 0.10
        CHECK_FALSE(drop_check(1.30 + cal.tau, m, cal)); // boundary is strict
    }
    SUBCASE("drop never fires on a starved denominator") {
        m.R = 0.0;
        m.denominator_ok = false;
        CHECK_FALSE(drop_check(10.0, m, cal));
    }
}

TEST_CASE("calibration statistics") {
    const Circuit c = coin_circuit();
    const NoiseModel nm = modest_noise();
    OracleConfig cfg;
    cfg.shots = 4096;
    cfg.null_runs = 6;

    const OracleCalibration cal = calibrate(c, nm, cfg, 42);

    REQUIRE(cal.null_ratios.size() == cfg.null_runs);
    for (double r : cal.null_ratios) {
        CHECK(r > 0.1);
        CHECK(r < 10.0);
    }
    CHECK(cal.tau >= 0.0);
    CHECK(cal.tvd_min > 0.0);

    SUBCASE("threshold follows the published formula over the null ratios") {
        double mean = 0.0;
        for (double r : cal.null_ratios) mean += r;
        mean /= double(cal.null_ratios.size());
        const double expected =
            std::max(0.0, mean + cfg.sigma_multiplier * sample_std(cal.null_ratios) - 1.0);
        CHECK(cal.tau == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("same seed reproduces the calibration exactly") {
        const OracleCalibration again = calibrate(c, nm, cfg, 42);
        CHECK(again.tau == cal.tau);
        CHECK(again.tvd_min == cal.tvd_min);
        CHECK(again.null_ratios == cal.null_ratios);
    }
    SUBCASE("different seed draws a different null spread") {
        const OracleCalibration other = calibrate(c, nm, cfg, 43);
        CHECK(other.null_ratios != cal.null_ratios);
    }
    SUBCASE("serialization carries all fields") {
        const std::string j = calibration_to_json_str(cal);
        CHECK(j.find("\"tau\"") != std::string::npos);
        CHECK(j.find("\"tvd_min\"") != std::string::npos);
        CHECK(j.find("\"null_ratios\"") != std::string::npos);
    }
}

TEST_CASE("calibration rejects a model with no signal") {
    // A noiseless model reproduces the deterministic circuit exactly, so the
    // ideal/noisy gap the ratio oracle divides by never exists.
    const Circuit c = bitflip_circuit();
    const NoiseModel silent; // all defaults: no depolarizing, no relaxation, no readout error
    OracleConfig cfg;
    cfg.shots = 128;
    cfg.null_runs = 3;
    try {
        calibrate(c, silent, cfg, 7);
        FAIL("expected DegenerateModel");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateModel);
    }
}

TEST_CASE("ratio measurement") {
    const Circuit c = coin_circuit();
    const NoiseModel nm = modest_noise();
    OracleConfig cfg;
    cfg.shots = 8192;
    cfg.null_runs = 8;
    const OracleCalibration cal = calibrate(c, nm, cfg, 5);

    SUBCASE("matched hardware sits near ratio one") {
        const RatioMeasurement m = measure_ratio(c, nm, executor_for(nm), cal, cfg.shots, 5);
        CHECK(m.tvd_ideal_hw > 0.0);
        CHECK(m.tvd_ideal_noisy > 0.0);
        CHECK(m.denominator_ok);
        CHECK(m.R > 0.5);
        CHECK(m.R < 2.0);
    }
    SUBCASE("excess-noise hardware drives the ratio above threshold") {
        NoiseModel loud = nm;
        loud.qubits[0].ro01 = 0.20;
        loud.qubits[0].ro10 = 0.20;
        const RatioMeasurement m = measure_ratio(c, nm, executor_for(loud), cal, cfg.shots, 5);
        CHECK(m.denominator_ok);
        CHECK(m.tvd_ideal_hw > m.tvd_ideal_noisy);
        CHECK(m.R > 1.0 + cal.tau);
        CHECK(sufficient_check(m, cal));
    }
    SUBCASE("repeat measurement with the same seed is identical") {
        const RatioMeasurement a = measure_ratio(c, nm, executor_for(nm), cal, cfg.shots, 11);
        const RatioMeasurement b = measure_ratio(c, nm, executor_for(nm), cal, cfg.shots, 11);
        CHECK(a.R == b.R);
        CHECK(a.tvd_ideal_hw == b.tvd_ideal_hw);
        CHECK(a.tvd_ideal_noisy == b.tvd_ideal_noisy);
        CHECK(a.denominator_ok == b.denominator_ok);
    }
}

TEST_CASE("measurement cache") {
    const Circuit coin = coin_circuit();
    const Circuit flip = bitflip_circuit();
    const NoiseModel nm = modest_noise();
    OracleConfig cfg;
    cfg.shots = 1024;
    cfg.null_runs = 4;
    const OracleCalibration cal = calibrate(coin, nm, cfg, 3);
    const Executor hw = executor_for(nm);

    OracleCache cache;
    RatioMeasurement probe;
    CHECK_FALSE(cache.lookup(fingerprint(coin), probe));
    CHECK(cache.size() == 0);

    bool hit = true;
    const RatioMeasurement first =
        measure_ratio_cached(coin, nm, hw, cal, cfg.shots, 9, cache, &hit);
    CHECK_FALSE(hit);
    CHECK(cache.size() == 1);

    const RatioMeasurement second =
        measure_ratio_cached(coin, nm, hw, cal, cfg.shots, 9, cache, &hit);
    CHECK(hit);
    CHECK(cache.size() == 1);
    CHECK(second.R == first.R);
    CHECK(second.tvd_ideal_hw == first.tvd_ideal_hw);
    CHECK(second.tvd_ideal_noisy == first.tvd_ideal_noisy);
    CHECK(second.denominator_ok == first.denominator_ok);

    measure_ratio_cached(flip, nm, hw, cal, cfg.shots, 9, cache, &hit);
    CHECK_FALSE(hit);
    CHECK(cache.size() == 2);

    RatioMeasurement found;
    CHECK(cache.lookup(fingerprint(coin), found));
    CHECK(found.R == first.R);
}
