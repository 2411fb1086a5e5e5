#include "oracle.hpp"

#include <cmath>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace qrisk {

namespace {

// Purpose tags keep the derived seed streams of the calibration and
// measurement phases disjoint.
constexpr uint64_t kTagNullA = 0x6e756c6c2d61ull;
constexpr uint64_t kTagNullB = 0x6e756c6c2d62ull;
constexpr uint64_t kTagNoisy = 0x6e6f697379ull;
constexpr uint64_t kTagHw = 0x68617264ull;

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / double(xs.size() - 1));
}

} // namespace

void validate(const OracleConfig& cfg) {
    if (cfg.shots < 1) raise(ErrorCode::InvalidArgument, "oracle needs at least 1 shot");
    if (cfg.null_runs < 2)
        raise(ErrorCode::InvalidArgument, "null spread needs at least 2 paired runs");
    if (!(cfg.sigma_multiplier > 0.0) || !(cfg.floor_multiplier > 0.0))
        raise(ErrorCode::InvalidArgument, "oracle multipliers must be positive");
}

OracleCalibration calibrate(const Circuit& circuit, const NoiseModel& nm,
                            const OracleConfig& cfg, uint64_t seed) {
    validate(cfg);
    const uint64_t fp = fingerprint(circuit);
    const Distribution ideal = ideal_distribution(circuit);

    OracleCalibration cal;
    std::vector<double> pair_tvds;
    for (uint32_t k = 0; k < cfg.null_runs; ++k) {
        Distribution a = noisy_sample(circuit, nm, cfg.shots, hash_mix({seed, fp, kTagNullA, k}));
        Distribution b = noisy_sample(circuit, nm, cfg.shots, hash_mix({seed, fp, kTagNullB, k}));
        const double ta = tvd(ideal, a);
        const double tb = tvd(ideal, b);
        if (ta <= 0.0 || tb <= 0.0)
            raise(ErrorCode::DegenerateModel,
                  "noise model indistinguishable from ideal; the ratio oracle has no signal");
        cal.null_ratios.push_back(tb / ta);
        pair_tvds.push_back(tvd(a, b));
    }
    cal.tau = std::max(0.0, mean_of(cal.null_ratios) +
                                cfg.sigma_multiplier * sample_std(cal.null_ratios) - 1.0);
    cal.tvd_min = cfg.floor_multiplier * mean_of(pair_tvds);
    if (!(cal.tvd_min > 0.0))
        raise(ErrorCode::DegenerateModel,
              "sampled distributions are exactly deterministic; no denominator floor exists");
    return cal;
}

RatioMeasurement measure_ratio(const Circuit& circuit, const NoiseModel& nm, const Executor& hw,
                               const OracleCalibration& cal, uint32_t shots, uint64_t seed) {
    const uint64_t fp = fingerprint(circuit);
    const Distribution ideal = ideal_distribution(circuit);
    const Distribution noisy = noisy_sample(circuit, nm, shots, hash_mix({seed, fp, kTagNoisy}));
    const Distribution hwd = hw(circuit, shots, hash_mix({seed, fp, kTagHw}));

    RatioMeasurement m;
    m.tvd_ideal_hw = tvd(ideal, hwd);
    m.tvd_ideal_noisy = tvd(ideal, noisy);
    m.denominator_ok = m.tvd_ideal_noisy >= cal.tvd_min && m.tvd_ideal_noisy > 0.0;
    m.R = m.tvd_ideal_noisy > 0.0 ? m.tvd_ideal_hw / m.tvd_ideal_noisy : 0.0;
    return m;
}

bool OracleCache::lookup(uint64_t key, RatioMeasurement& out) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it == memo_.end()) return false;
    out = it->second;
    return true;
}

void OracleCache::store(uint64_t key, const RatioMeasurement& m) {
    std::lock_guard<std::mutex> lock(mu_);
    memo_[key] = m;
}

size_t OracleCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.size();
}

RatioMeasurement measure_ratio_cached(const Circuit& circuit, const NoiseModel& nm,
                                      const Executor& hw, const OracleCalibration& cal,
                                      uint32_t shots, uint64_t seed, OracleCache& cache,
                                      bool* cache_hit) {
    const uint64_t key = fingerprint(circuit);
    RatioMeasurement m;
    if (cache.lookup(key, m)) {
        if (cache_hit) *cache_hit = true;
        return m;
    }
    m = measure_ratio(circuit, nm, hw, cal, shots, seed);
    cache.store(key, m);
    if (cache_hit) *cache_hit = false;
    return m;
}

bool drop_check(double baseline_R, const RatioMeasurement& reduced, const OracleCalibration& cal) {
    return reduced.denominator_ok && (baseline_R - reduced.R) > cal.tau;
}

bool sufficient_check(const RatioMeasurement& kept, const OracleCalibration& cal) {
    return kept.denominator_ok && kept.R > 1.0 + cal.tau;
}


std::string calibration_to_json_str(const OracleCalibration& cal, int indent) {
    nlohmann::json j{{"tau", cal.tau},
                     {"tvd_min", cal.tvd_min},
                     {"null_ratios", cal.null_ratios}};
    return j.dump(indent);
}

} // namespace qrisk
