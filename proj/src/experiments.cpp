#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "parallel.hpp"
#include "patterns.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "transform.hpp"

namespace qrisk {

namespace {

// Sx pairs are kept inside one 3-moment segment so that removing whole
// segments never splits a pair; a split pair would leave the qubit in an
// equal superposition, hiding readout and bit-flip deviations from the TVD.
constexpr uint32_t kSegmentAlign = 3;

constexpr uint64_t kTagFill = 0x6c6c6966;    // workload filler stream
constexpr uint64_t kTagCircuit = 0x74637263; // per-base-circuit seeds
constexpr uint64_t kTagShuffle = 0x6c666873; // execution-order shuffle
constexpr uint64_t kTagHwRun = 0x6e757268;   // hardware execution per slot
constexpr uint64_t kTagSimRun = 0x6e757273;  // noise-model sim per slot

uint32_t template_role_count(const GateTemplate& tmpl) {
    uint32_t max_role = 0;
    bool any = false;
    for (const auto& step : tmpl.steps) {
        for (uint32_t r : step.roles) {
            max_role = std::max(max_role, r);
            any = true;
        }
    }
    return any ? max_role + 1 : 0;
}

void validate_splice(const SpliceSpec& splice, const std::set<uint32_t>& pool,
                     const CouplingGraph& graph) {
    if (splice.tmpl.steps.empty()) {
        raise(ErrorCode::InvalidArgument, "splice template has no steps");
    }
    for (const auto& step : splice.tmpl.steps) {
        const size_t want = step.kind == GateKind::Cz ? 2 : 1;
        if (step.kind == GateKind::Measure) {
            raise(ErrorCode::InvalidArgument, "splice templates cannot contain MEASURE");
        }
        if (step.roles.size() != want) {
            raise(ErrorCode::InvalidArgument, "splice template step has wrong role count");
        }
        if (want == 2 && step.roles[0] == step.roles[1]) {
            raise(ErrorCode::InvalidArgument, "cz step needs two distinct roles");
        }
    }
    if (splice.binding.size() != template_role_count(splice.tmpl)) {
        raise(ErrorCode::InvalidArgument, "splice binding size does not match template roles");
    }
    std::set<uint32_t> distinct(splice.binding.begin(), splice.binding.end());
    if (distinct.size() != splice.binding.size()) {
        raise(ErrorCode::InvalidArgument, "splice binding has repeated qubits");
    }
    for (uint32_t q : splice.binding) {
        if (!pool.count(q)) {
            raise(ErrorCode::InvalidArgument,
                  "splice binding qubit " + std::to_string(q) + " is outside the workload pool");
        }
    }
    for (const auto& step : splice.tmpl.steps) {
        if (step.kind == GateKind::Cz &&
            !graph.coupled(splice.binding[step.roles[0]], splice.binding[step.roles[1]])) {
            raise(ErrorCode::InvalidArgument, "splice cz step binds an uncoupled qubit pair");
        }
    }
}

} // namespace

Circuit make_workload(const std::string& backend_id, const CouplingGraph& graph,
                      const WorkloadOptions& options, uint64_t seed) {
    if (options.qubits.empty()) raise(ErrorCode::InvalidArgument, "workload pool is empty");
    if (options.qubits.size() > 12) {
        raise(ErrorCode::InvalidArgument, "workload pool exceeds the 12-qubit simulation limit");
    }
    if (options.gate_moments == 0) raise(ErrorCode::InvalidArgument, "gate_moments must be > 0");
    if (options.fill_prob < 0.0 || options.fill_prob > 1.0 || options.cz_prob < 0.0 ||
        options.cz_prob > 1.0) {
        raise(ErrorCode::InvalidArgument, "fill/cz probabilities must lie in [0,1]");
    }
    std::vector<uint32_t> pool = options.qubits;
    std::sort(pool.begin(), pool.end());
    const std::set<uint32_t> pool_set(pool.begin(), pool.end());
    if (pool_set.size() != pool.size()) {
        raise(ErrorCode::InvalidArgument, "workload pool has repeated qubits");
    }
    for (uint32_t q : pool) {
        if (q >= graph.num_qubits) {
            raise(ErrorCode::InvalidArgument, "pool qubit outside the coupling graph");
        }
    }

    std::set<std::pair<uint32_t, uint32_t>> blocked_edges;
    std::map<uint32_t, uint32_t> forced_until; // qubit -> keep filling before this moment
    std::map<uint32_t, std::vector<uint32_t>> splice_starts; // qubit -> block start moments
    for (size_t s = 0; s < options.splices.size(); ++s) {
        const SpliceSpec& splice = options.splices[s];
        validate_splice(splice, pool_set, graph);
        const auto span = static_cast<uint32_t>(splice.tmpl.steps.size());
        if (splice.moment + span > options.gate_moments) {
            raise(ErrorCode::InvalidArgument, "splice block extends past gate_moments");
        }
        if (s > 0) {
            const SpliceSpec& prev = options.splices[s - 1];
            const auto min_gap =
                std::max<uint32_t>(5, static_cast<uint32_t>(prev.tmpl.steps.size()));
            if (splice.moment < prev.moment + min_gap) {
                raise(ErrorCode::InvalidArgument, "splice blocks too close together");
            }
        }
        for (const auto& step : splice.tmpl.steps) {
            if (step.kind == GateKind::Cz) {
                const uint32_t a = splice.binding[step.roles[0]];
                const uint32_t b = splice.binding[step.roles[1]];
                blocked_edges.insert({std::min(a, b), std::max(a, b)});
            }
        }
        for (uint32_t q : splice.binding) {
            auto [it, inserted] = forced_until.try_emplace(q, splice.moment);
            if (!inserted) it->second = std::max(it->second, splice.moment);
            splice_starts[q].push_back(splice.moment);
        }
    }
    // The first pool qubit acts as a clock: it receives an op in every moment,
    // which keeps the total gate-moment count exactly at gate_moments.
    forced_until[pool.front()] = options.gate_moments;

    Rng rng(hash_mix({seed, kTagFill}));
    Circuit circuit;
    circuit.backend_id = backend_id;
    circuit.num_physical_qubits = std::max(graph.num_qubits, pool.back() + 1);

    std::map<uint32_t, uint32_t> next_free;
    for (uint32_t q : pool) next_free[q] = 0;
    const double two_pi = 8.0 * std::atan(1.0);
    size_t next_splice = 0;

    // Filler keeps ideal outputs concentrated on few basis states (RZ and CZ
    // are diagonal, X permutes, SX is only emitted in squared pairs), so the
    // calibration model's readout/depolarizing deviations stay visible as TVD
    // on every segment subset instead of washing out against a near-uniform
    // scrambled distribution.
    auto emit_single = [&](uint32_t q) {
        uint32_t room = options.gate_moments - next_free[q];
        const auto starts = splice_starts.find(q);
        if (starts != splice_starts.end()) {
            for (uint32_t start : starts->second) {
                if (start >= next_free[q]) {
                    room = std::min(room, start - next_free[q]);
                    break;
                }
            }
        }
        const double pick = rng.uniform();
        Operation op;
        op.qubits = {q};
        if (pick < 0.4) {
            op.kind = GateKind::Rz;
            op.angle = rng.uniform() * two_pi;
        } else if (pick < 0.7 || room < 2 || next_free[q] % kSegmentAlign == kSegmentAlign - 1) {
            op.kind = GateKind::X;
        } else {
            op.kind = GateKind::Sx;
            circuit.ops.push_back(op);
            ++next_free[q];
        }
        circuit.ops.push_back(std::move(op));
        ++next_free[q];
    };

    for (uint32_t m = 0; m < options.gate_moments; ++m) {
        while (next_splice < options.splices.size() &&
               options.splices[next_splice].moment == m) {
            const SpliceSpec& splice = options.splices[next_splice];
            for (uint32_t q : splice.binding) {
                if (next_free[q] != m) {
                    raise(ErrorCode::Internal, "splice block landed off its planned moment");
                }
            }
            for (const auto& step : splice.tmpl.steps) {
                Operation op;
                op.kind = step.kind;
                if (step.kind == GateKind::Rz) op.angle = rng.uniform() * two_pi;
                uint32_t landing = 0;
                for (uint32_t r : step.roles) {
                    op.qubits.push_back(splice.binding[r]);
                    landing = std::max(landing, next_free[splice.binding[r]]);
                }
                for (uint32_t q : op.qubits) next_free[q] = landing + 1;
                circuit.ops.push_back(std::move(op));
            }
            ++next_splice;
        }
        for (uint32_t q : pool) {
            if (next_free[q] > m) continue; // mid-block or already filled ahead
            const auto forced = forced_until.find(q);
            const bool must = forced != forced_until.end() && m < forced->second;
            if (!must && rng.uniform() >= options.fill_prob) continue;
            if (rng.uniform() < options.cz_prob) {
                std::vector<uint32_t> partners;
                for (uint32_t r : pool) {
                    if (r == q || next_free[r] > m || !graph.coupled(q, r)) continue;
                    if (blocked_edges.count({std::min(q, r), std::max(q, r)})) continue;
                    partners.push_back(r);
                }
                if (!partners.empty()) {
                    const uint32_t r = partners[rng.below(partners.size())];
                    Operation op;
                    op.kind = GateKind::Cz;
                    op.qubits = {q, r};
                    circuit.ops.push_back(std::move(op));
                    const uint32_t landing = std::max(next_free[q], next_free[r]);
                    next_free[q] = landing + 1;
                    next_free[r] = landing + 1;
                    continue;
                }
            }
            emit_single(q);
        }
    }
    for (uint32_t q : pool) {
        Operation op;
        op.kind = GateKind::Measure;
        op.qubits = {q};
        circuit.ops.push_back(std::move(op));
    }
    validate(circuit);
    return circuit;
}

namespace {

PatternEntry entry_for_rule(const std::string& backend_id, const ContextRule& rule,
                            const std::string& source) {
    PatternEntry entry;
    entry.backend_id = backend_id;
    entry.qubit_tuple = rule.binding;
    entry.tmpl = rule.tmpl;
    entry.windows_flagged = 2;
    entry.windows_total = 2;
    entry.flagged_window_uids = {1, 2};
    entry.examined_window_uids = {1, 2};
    entry.source = source;
    return entry;
}

std::vector<uint32_t> pick_pool(const BackendSpec& spec) {
    std::set<uint32_t> pool;
    for (const auto& rule : spec.hidden_rules) {
        pool.insert(rule.binding.begin(), rule.binding.end());
    }
    // Grow with coupled neighbours for filler variety, keeping the pool small
    // enough that the shot-noise floor stays well under the injected signal.
    for (const auto& [a, b] : spec.graph.edges) {
        if (pool.size() >= 5) break;
        if (pool.count(a) && !pool.count(b)) pool.insert(b);
        else if (pool.count(b) && !pool.count(a)) pool.insert(a);
    }
    return {pool.begin(), pool.end()};
}

size_t count_entry_occurrences(const std::vector<PatternOccurrence>& occs, size_t entry_index) {
    size_t n = 0;
    for (const auto& occ : occs) {
        if (occ.entry_index == entry_index) ++n;
    }
    return n;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

} // namespace

ScalingReport scaling_experiment(const BackendSpec& spec, const ScalingOptions& options,
                                 uint64_t master_seed) {
    validate(spec);
    if (spec.hidden_rules.empty()) {
        raise(ErrorCode::InvalidArgument, "scaling experiment needs at least one hidden rule");
    }
    if (options.circuits < 2) {
        raise(ErrorCode::InvalidArgument, "scaling experiment needs at least 2 base circuits");
    }
    if (options.shots == 0) raise(ErrorCode::InvalidArgument, "shots must be > 0");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        raise(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
    }
    const auto t0 = std::chrono::steady_clock::now();

    const ContextRule& target = spec.hidden_rules[0];
    const std::vector<uint32_t> pool = pick_pool(spec);

    // Scan database: entry 0 is the disruption target, the rest are the
    // background rules that stay embedded in every variant.
    PatternDB scan_db;
    std::vector<PatternEntry> entries;
    entries.push_back(entry_for_rule(spec.backend_id, target, "scaling target"));
    for (size_t r = 1; r < spec.hidden_rules.size(); ++r) {
        entries.push_back(
            entry_for_rule(spec.backend_id, spec.hidden_rules[r], "scaling background"));
    }
    db_add(scan_db, entries);
    PatternDB target_db;
    db_add(target_db, {entries.front()});

    // Splice schedule: three target blocks with every background rule embedded
    // twice, interleaved between them, all starting on segment boundaries.
    uint32_t max_steps = 5;
    for (const auto& rule : spec.hidden_rules) {
        max_steps = std::max(max_steps, static_cast<uint32_t>(rule.tmpl.steps.size()));
    }
    const uint32_t stride = 3 * ((max_steps + 2) / 3 + 1);
    std::vector<const ContextRule*> schedule;
    const size_t n_bg = spec.hidden_rules.size() - 1;
    schedule.push_back(&target);
    for (size_t r = 1; r <= n_bg; ++r) schedule.push_back(&spec.hidden_rules[r]);
    schedule.push_back(&target);
    for (size_t r = 1; r <= n_bg; ++r) schedule.push_back(&spec.hidden_rules[r]);
    schedule.push_back(&target);
    WorkloadOptions wl;
    wl.gate_moments = options.gate_moments;
    wl.qubits = pool;
    wl.fill_prob = options.fill_prob;
    wl.cz_prob = options.cz_prob;
    uint32_t cursor = 6;
    for (const ContextRule* rule : schedule) {
        SpliceSpec splice;
        splice.tmpl = rule->tmpl;
        splice.binding = rule->binding;
        splice.moment = cursor;
        wl.splices.push_back(std::move(splice));
        cursor += stride;
    }
    if (cursor + max_steps > options.gate_moments) {
        raise(ErrorCode::InvalidArgument,
              "gate_moments too small for the splice schedule; need at least " +
                  std::to_string(cursor + max_steps));
    }

    ScalingReport report;
    report.alpha = options.alpha;
    std::vector<Circuit> variants;
    for (uint32_t c = 0; c < options.circuits; ++c) {
        bool built = false;
        for (uint64_t attempt = 0; attempt < 50 && !built; ++attempt) {
            const uint64_t wl_seed = hash_mix({master_seed, kTagCircuit, c, attempt});
            const Circuit base = make_workload(spec.backend_id, spec.graph, wl, wl_seed);
            const auto base_occs = scan(base, scan_db);
            if (count_entry_occurrences(base_occs, 0) != 3) continue;
            bool bg_ok = true;
            for (size_t r = 1; r < entries.size(); ++r) {
                if (count_entry_occurrences(base_occs, r) != 2) bg_ok = false;
            }
            if (!bg_ok) continue;

            std::vector<Circuit> circuit_variants;
            std::vector<ScalingRow> circuit_rows;
            bool variants_ok = true;
            for (uint32_t survivors = 0; survivors <= 3; ++survivors) {
                DisruptOptions dopt;
                dopt.max_disruptions = 3 - survivors;
                TransformResult tr = disrupt(base, target_db, dopt);
                const auto occs = scan(tr.circuit, scan_db);
                if (count_entry_occurrences(occs, 0) != survivors) {
                    variants_ok = false;
                    break;
                }
                for (size_t r = 1; r < entries.size(); ++r) {
                    if (count_entry_occurrences(occs, r) != 2) variants_ok = false;
                }
                if (!variants_ok) break;
                ScalingRow row;
                row.circuit_index = c;
                row.survivors = survivors;
                row.swaps_applied = static_cast<uint32_t>(tr.swaps_applied.size());
                circuit_rows.push_back(row);
                circuit_variants.push_back(std::move(tr.circuit));
            }
            if (!variants_ok) continue;
            for (size_t k = 0; k < circuit_rows.size(); ++k) {
                report.rows.push_back(circuit_rows[k]);
                variants.push_back(std::move(circuit_variants[k]));
            }
            built = true;
        }
        if (!built) {
            raise(ErrorCode::Internal,
                  "could not build a clean workload for circuit " + std::to_string(c));
        }
    }

    // Execute every variant once, in a shuffled order, inside one calibration
    // window; per-slot seeds keep the schedule itself reproducible.
    const CalibrationWindow window = open_window(spec, 0, master_seed);
    const NoiseModel calibration = export_calibration(window);
    std::vector<size_t> order(report.rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(hash_mix({master_seed, kTagShuffle}));
    for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    parallel_for(order.size(), [&](size_t slot) {
        ScalingRow& row = report.rows[order[slot]];
        const Circuit& circuit = variants[order[slot]];
        row.position = static_cast<uint32_t>(slot);
        const Distribution hw =
            execute_on_window(circuit, window, options.shots, hash_mix({master_seed, kTagHwRun, slot}));
        const Distribution noisy = noisy_sample(circuit, calibration, options.shots,
                                                hash_mix({master_seed, kTagSimRun, slot}));
        const Distribution ideal = ideal_distribution(circuit);
        row.tvd_noisy_hw = tvd(noisy, hw);
        row.tvd_ideal_noisy = tvd(ideal, noisy);
    });

    std::vector<double> survivors_col, hw_col, blind_col;
    std::vector<std::vector<double>> by_group(4);
    for (const auto& row : report.rows) {
        survivors_col.push_back(static_cast<double>(row.survivors));
        hw_col.push_back(row.tvd_noisy_hw);
        blind_col.push_back(row.tvd_ideal_noisy);
        by_group[row.survivors].push_back(row.tvd_noisy_hw);
    }
    for (uint32_t g = 0; g < 4; ++g) {
        GroupSummary summary;
        summary.survivors = g;
        summary.mean_tvd_noisy_hw = mean_of(by_group[g]);
        summary.stddev_tvd_noisy_hw = stddev_of(by_group[g]);
        std::vector<double> blind;
        for (const auto& row : report.rows) {
            if (row.survivors == g) blind.push_back(row.tvd_ideal_noisy);
        }
        summary.mean_tvd_ideal_noisy = mean_of(blind);
        report.groups.push_back(summary);
    }
    const SpearmanResult sp = spearman(survivors_col, hw_col);
    report.rho = sp.rho;
    report.rho_p = sp.p;
    const SpearmanResult spb = spearman(survivors_col, blind_col);
    report.blind_rho = spb.rho;
    report.blind_rho_p = spb.p;
    const MannWhitneyResult mw = mann_whitney_u(by_group[0], by_group[3]);
    report.mw_u = mw.U;
    report.mw_p = mw.p;
    const double mean0 = report.groups[0].mean_tvd_noisy_hw;
    const double mean3 = report.groups[3].mean_tvd_noisy_hw;
    report.reduction_3_to_0 = mean3 > 0.0 ? (mean3 - mean0) / mean3 : 0.0;

    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    return report;
}

static void to_json(nlohmann::json& j, const ScalingRow& row) {
    j = nlohmann::json{{"circuit", row.circuit_index},
                       {"survivors", row.survivors},
                       {"position", row.position},
                       {"swaps_applied", row.swaps_applied},
                       {"tvd_noisy_hw", row.tvd_noisy_hw},
                       {"tvd_ideal_noisy", row.tvd_ideal_noisy}};
}

static void to_json(nlohmann::json& j, const GroupSummary& g) {
    j = nlohmann::json{{"survivors", g.survivors},
                       {"mean_tvd_noisy_hw", g.mean_tvd_noisy_hw},
                       {"stddev_tvd_noisy_hw", g.stddev_tvd_noisy_hw},
                       {"mean_tvd_ideal_noisy", g.mean_tvd_ideal_noisy}};
}

std::string scaling_report_to_json_str(const ScalingReport& report, int indent) {
    nlohmann::json j{{"rows", report.rows},
                     {"groups", report.groups},
                     {"spearman", {{"rho", report.rho}, {"p", report.rho_p}}},
                     {"spearman_blind", {{"rho", report.blind_rho}, {"p", report.blind_rho_p}}},
                     {"mann_whitney_0_vs_3", {{"U", report.mw_u}, {"p", report.mw_p}}},
                     {"reduction_3_to_0", report.reduction_3_to_0},
                     {"alpha", report.alpha},
                     {"meta", {{"elapsed_ms", report.elapsed_ms}}}};
    return j.dump(indent);
}

std::string scaling_report_to_csv(const ScalingReport& report) {
    std::string out = "circuit,survivors,position,swaps_applied,tvd_noisy_hw,tvd_ideal_noisy\n";
    char line[192];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%u,%u,%u,%u,%.6f,%.6f\n", row.circuit_index,
                      row.survivors, row.position, row.swaps_applied, row.tvd_noisy_hw,
                      row.tvd_ideal_noisy);
        out += line;
    }
    return out;
}

std::string scaling_report_to_plot_data(const ScalingReport& report) {
    std::string out = "# survivors tvd_noisy_hw tvd_ideal_noisy\n";
    char line[128];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%u %.6f %.6f\n", row.survivors, row.tvd_noisy_hw,
                      row.tvd_ideal_noisy);
        out += line;
    }
    return out;
}

} // namespace qrisk
