#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "hardware.hpp"
#include "lowering.hpp"
#include "match.hpp"

namespace qrisk {

/// A gate-sequence block to embed verbatim in a generated workload, starting
/// exactly at `moment` (which callers usually align to a segment boundary).
struct SpliceSpec {
    GateTemplate tmpl;
    std::vector<uint32_t> binding; ///< physical qubit per template role
    uint32_t moment = 0;
};

struct WorkloadOptions {
    uint32_t gate_moments = 105;    ///< moments before the trailing measurements
    std::vector<uint32_t> qubits;   ///< qubit pool; every pool qubit is measured
    double fill_prob = 0.6;         ///< chance an idle pool qubit receives filler
    double cz_prob = 0.3;           ///< filler is CZ (vs single-qubit) at this rate
    std::vector<SpliceSpec> splices;
};

/// Deterministic random workload: single-qubit RZ/SX filler plus CZ filler on
/// coupled pool edges, with each splice block landing at its requested moment.
/// Filler never places a CZ on an edge bound by a splice, so a spliced block
/// whose template ends in a CZ on its bound edge is the only way that template
/// can occur on that binding. Splices must be in ascending-moment order with
/// at least 5 moments between block starts.
Circuit make_workload(const std::string& backend_id, const CouplingGraph& graph,
                      const WorkloadOptions& options, uint64_t seed);

/// One executed circuit variant in the scaling study.
struct ScalingRow {
    uint32_t circuit_index = 0; ///< base workload index
    uint32_t survivors = 0;     ///< pattern occurrences left after disruption
    uint32_t position = 0;      ///< slot in the shuffled execution schedule
    uint32_t swaps_applied = 0;
    double tvd_noisy_hw = 0.0;    ///< noise-model sim vs hardware execution
    double tvd_ideal_noisy = 0.0; ///< ideal vs noise-model sim (blind column)
};

struct GroupSummary {
    uint32_t survivors = 0;
    double mean_tvd_noisy_hw = 0.0;
    double stddev_tvd_noisy_hw = 0.0;
    double mean_tvd_ideal_noisy = 0.0;
};

struct ScalingOptions {
    uint32_t circuits = 10; ///< base workloads; each yields 4 survivor variants
    uint32_t shots = 8192;
    uint32_t gate_moments = 60;
    double fill_prob = 0.6;
    double cz_prob = 0.3;
    double alpha = 0.01;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;     ///< sorted by (circuit_index, survivors)
    std::vector<GroupSummary> groups; ///< survivors 0..3
    double rho = 0.0;                 ///< Spearman: survivors vs tvd_noisy_hw
    double rho_p = 1.0;               ///< two-sided
    double blind_rho = 0.0;           ///< Spearman: survivors vs tvd_ideal_noisy
    double blind_rho_p = 1.0;
    double mw_u = 0.0; ///< Mann-Whitney U: group 0 below group 3, tvd_noisy_hw
    double mw_p = 1.0; ///< one-sided
    double reduction_3_to_0 = 0.0; ///< (mean3 - mean0) / mean3 of tvd_noisy_hw
    double alpha = 0.01;
    double elapsed_ms = 0.0;
};

/// Embeds the first hidden rule of `spec` three times in each of
/// `options.circuits` random workloads, derives survivor variants 0..3 by
/// breaking occurrences with commuting swaps, executes all variants in a
/// shuffled order against calibration window 0, and correlates survivor count
/// with the noise-model-vs-hardware distribution gap. Any further hidden
/// rules are embedded identically (twice) in every variant as background
/// contamination and never disrupted. Requires at least one hidden rule.
ScalingReport scaling_experiment(const BackendSpec& spec, const ScalingOptions& options,
                                 uint64_t master_seed);

std::string scaling_report_to_json_str(const ScalingReport& report, int indent = 2);
std::string scaling_report_to_csv(const ScalingReport& report);
/// Whitespace-separated "survivors tvd_noisy_hw tvd_ideal_noisy" rows for
/// direct consumption by gnuplot.
std::string scaling_report_to_plot_data(const ScalingReport& report);

} // namespace qrisk
