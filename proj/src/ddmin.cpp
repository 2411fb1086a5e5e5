#include "ddmin.hpp"

#include <algorithm>
#include <iterator>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace qrisk {

std::vector<uint32_t> ddmin(const std::vector<uint32_t>& segments, const DropPredicate& drop,
                            const SufficientPredicate& sufficient, uint32_t n_max,
                            DdminTrace* trace,
                            const std::function<void(const std::vector<uint32_t>&)>& on_restart) {
    if (segments.empty()) raise(ErrorCode::InvalidArgument, "ddmin needs at least one segment");
    if (n_max < 2) raise(ErrorCode::InvalidArgument, "n_max must be at least 2");
    DdminTrace local;
    DdminTrace& tr = trace ? *trace : local;

    std::vector<uint32_t> cands = segments;
    uint32_t n = 2;
    while (cands.size() >= 2 && n <= n_max) {
        const size_t n_eff = std::min<size_t>(n, cands.size());
        std::vector<std::vector<uint32_t>> groups;
        const size_t base = cands.size() / n_eff, extra = cands.size() % n_eff;
        for (size_t i = 0, pos = 0; i < n_eff; ++i) {
            const size_t len = base + (i < extra ? 1 : 0);
            groups.emplace_back(cands.begin() + long(pos), cands.begin() + long(pos + len));
            pos += len;
        }

        bool narrowed = false;
        for (size_t i = 0; i < n_eff && !narrowed; ++i) {
            const std::vector<uint32_t>& gi = groups[i];
            std::vector<uint32_t> rest;
            std::set_difference(cands.begin(), cands.end(), gi.begin(), gi.end(),
                                std::back_inserter(rest));
            ++tr.predicate_calls;
            if (drop(gi, rest)) { // removing G_i kills the signal: culprit inside G_i
                cands = gi;
                narrowed = true;
                break;
            }
            ++tr.predicate_calls;
            if (drop(rest, gi)) { // removing the complement kills it instead
                cands = rest;
                narrowed = true;
                break;
            }
            if (gi.size() < cands.size()) {
                ++tr.predicate_calls;
                if (sufficient(gi)) { // G_i alone still carries the signal
                    cands = gi;
                    narrowed = true;
                    break;
                }
            }
        }

        if (narrowed) {
            ++tr.restarts;
            n = 2;
            if (on_restart) on_restart(cands);
        } else {
            n *= 2;
        }
    }
    return cands;
}

const char* discovery_status_name(DiscoveryStatus s) {
    switch (s) {
        case DiscoveryStatus::Found: return "found";
        case DiscoveryStatus::NoExcess: return "no_excess";
        case DiscoveryStatus::Exhausted: return "exhausted";
    }
    raise(ErrorCode::Internal, "unknown discovery status");
}

namespace {

/// Shared state of one discovery run; predicates and restart hook close over it.
struct DiscoverySession {
    const Circuit& circuit;
    const NoiseModel& nm;
    const Executor& hw;
    const DiscoveryOptions& options;
    uint64_t seed;

    std::vector<Segment> segments;
    OracleCalibration cal;
    OracleCache cache;
    double baseline_R = 0.0;
    std::vector<OracleCallRecord> ledger;

    Circuit keep_only(const std::vector<uint32_t>& kept) const {
        return remove_segments(circuit, segments,
                               std::set<uint32_t>(kept.begin(), kept.end()));
    }

    RatioMeasurement measure(const std::vector<uint32_t>& kept, const char* purpose,
                             bool decision, bool* denominator_ok = nullptr) {
        bool hit = false;
        const Circuit sub = keep_only(kept);
        RatioMeasurement m = measure_ratio_cached(sub, nm, hw, cal, options.oracle.shots, seed,
                                                  cache, &hit);
        OracleCallRecord rec;
        rec.purpose = purpose;
        rec.kept_segments = kept;
        rec.measurement = m;
        rec.decision = decision;
        rec.skipped = !m.denominator_ok;
        rec.cached = hit;
        ledger.push_back(std::move(rec));
        if (denominator_ok) *denominator_ok = m.denominator_ok;
        return m;
    }

    void finish_record(bool decision) { ledger.back().decision = decision; }
};

} // namespace

DiscoveryResult discover(const Circuit& circuit, const NoiseModel& exported_calibration,
                         const Executor& hw, const DiscoveryOptions& options, uint64_t seed) {
    validate(circuit);
    validate(exported_calibration);
    validate(options.oracle);
    if (options.segment_size < 1)
        raise(ErrorCode::InvalidArgument, "segment size must be at least 1");

    DiscoveryResult result;
    result.segments = group_segments(partition_into_moments(circuit), options.segment_size);
    if (result.segments.empty())
        raise(ErrorCode::InvalidArgument, "circuit has no moments to search");

    DiscoverySession s{circuit, exported_calibration, hw, options, seed, result.segments,
                       calibrate(circuit, exported_calibration, options.oracle, seed)};

    std::vector<uint32_t> all(result.segments.size());
    for (uint32_t i = 0; i < all.size(); ++i) all[i] = i;

    // Baseline gate: without full-circuit excess there is nothing to search for.
    const RatioMeasurement full = s.measure(all, "baseline", false);
    const bool proceed = sufficient_check(full, s.cal);
    s.finish_record(proceed);
    s.baseline_R = full.R;
    result.baseline_R = full.R;

    if (!proceed) {
        result.status = DiscoveryStatus::NoExcess;
    } else {
        DropPredicate drop = [&s](const std::vector<uint32_t>& removed,
                                  const std::vector<uint32_t>& remaining) {
            (void)removed;
            const RatioMeasurement m = s.measure(remaining, "drop", false);
            const bool hit = drop_check(s.baseline_R, m, s.cal);
            s.finish_record(hit);
            return hit;
        };
        SufficientPredicate sufficient = [&s](const std::vector<uint32_t>& kept) {
            const RatioMeasurement m = s.measure(kept, "sufficient", false);
            const bool hit = sufficient_check(m, s.cal);
            s.finish_record(hit);
            return hit;
        };
        // After each narrowing the working circuit changes, so the reference
        // ratio is re-measured; a floor-violating re-measure keeps the old one.
        auto on_restart = [&s](const std::vector<uint32_t>& cands) {
            bool ok = false;
            const RatioMeasurement m = s.measure(cands, "baseline", false, &ok);
            if (ok) s.baseline_R = m.R;
            s.finish_record(ok);
        };

        DdminTrace trace;
        const std::vector<uint32_t> cands =
            ddmin(all, drop, sufficient, options.n_max, &trace, on_restart);
        result.narrowing_steps = trace.restarts;

        // Confirmation: the surviving candidates must still carry the signal
        // on their own, otherwise the search exhausted without an answer.
        const RatioMeasurement confirm = s.measure(cands, "confirm", false);
        const bool found = sufficient_check(confirm, s.cal);
        s.finish_record(found);
        if (found) {
            result.status = DiscoveryStatus::Found;
            result.flagged_segments.insert(cands.begin(), cands.end());
        } else {
            result.status = DiscoveryStatus::Exhausted;
        }
    }

    result.calibration = s.cal;
    result.ledger = std::move(s.ledger);
    result.oracle_calls = result.ledger.size();
    for (const auto& rec : result.ledger)
        if (rec.skipped) ++result.skipped_steps;
    return result;
}

std::string discovery_result_to_json_str(const DiscoveryResult& result, int indent) {
    nlohmann::json ledger = nlohmann::json::array();
    for (const auto& rec : result.ledger) {
        ledger.push_back({{"purpose", rec.purpose},
                          {"kept_segments", rec.kept_segments},
                          {"tvd_ideal_hw", rec.measurement.tvd_ideal_hw},
                          {"tvd_ideal_noisy", rec.measurement.tvd_ideal_noisy},
                          {"R", rec.measurement.R},
                          {"denominator_ok", rec.measurement.denominator_ok},
                          {"decision", rec.decision},
                          {"skipped", rec.skipped},
                          {"cached", rec.cached}});
    }
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& seg : result.segments) {
        segments.push_back({{"index", seg.index},
                            {"moment_begin", seg.moment_begin},
                            {"moment_end", seg.moment_end},
                            {"op_ids", seg.op_ids}});
    }
    nlohmann::json j{
        {"status", discovery_status_name(result.status)},
        {"flagged_segments", result.flagged_segments},
        {"baseline_R", result.baseline_R},
        {"calibration",
         {{"tau", result.calibration.tau},
          {"tvd_min", result.calibration.tvd_min},
          {"null_ratios", result.calibration.null_ratios}}},
        {"oracle_calls", result.oracle_calls},
        {"narrowing_steps", result.narrowing_steps},
        {"skipped_steps", result.skipped_steps},
        {"segments", segments},
        {"ledger", ledger}};
    return j.dump(indent);
}

} // namespace qrisk
