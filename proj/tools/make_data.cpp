// Regenerates the JSON fixtures shipped in data/: three spec variants of the
// same star-coupled mock device (clean, one hidden context rule, two hidden
// context rules) and two deterministic benchmark workloads. Run from the
// repository root: `make_data [output_dir]`.

#include <cstdio>
#include <fstream>
#include <string>

#include "circuit.hpp"
#include "experiments.hpp"
#include "hardware.hpp"
#include "sim.hpp"

using namespace qrisk;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", path.c_str());
        std::exit(1);
    }
    std::printf("wrote %s\n", path.c_str());
}

BackendSpec base_spec() {
    BackendSpec spec;
    spec.backend_id = "mock_star";
    spec.graph.num_qubits = 110;
    spec.graph.add_edge(107, 97);
    spec.graph.add_edge(107, 106);
    spec.graph.add_edge(107, 108);
    spec.graph.add_edge(107, 105);
    NoiseModel nm;
    nm.sx = {1e-4, 32.0};
    nm.x = {1e-4, 32.0};
    nm.cz = {5e-4, 68.0};
    nm.measure_duration = 1000.0;
    for (uint32_t q : {97u, 105u, 106u, 107u, 108u})
        nm.qubits[q] = QubitNoise{800000.0, 600000.0, 0.04, 0.04};
    spec.base_calibration = nm;
    spec.drift.sigma_mult = 0.1;
    spec.drift.transient_prob = 0.0;
    return spec;
}

ContextRule single_rule() {
    ContextRule rule;
    rule.tmpl.steps = {{GateKind::Sx, {0}}, {GateKind::Sx, {0}}, {GateKind::Cz, {0, 1}}};
    rule.binding = {97, 107};
    rule.excess = 0.05;
    return rule;
}

ContextRule scaling_target_rule() {
    ContextRule rule;
    rule.tmpl.steps = {{GateKind::Sx, {0}},
                       {GateKind::Sx, {0}},
                       {GateKind::Rz, {0}},
                       {GateKind::Cz, {0, 1}}};
    rule.binding = {97, 107};
    rule.excess = 0.15;
    return rule;
}

ContextRule scaling_background_rule() {
    ContextRule rule;
    rule.tmpl.steps = {{GateKind::X, {0}}, {GateKind::Cz, {0, 1}}, {GateKind::X, {0}}};
    rule.binding = {106, 107};
    rule.excess = 0.15;
    return rule;
}

Circuit benchmark_workload(const BackendSpec& spec, bool with_injection) {
    WorkloadOptions wl;
    wl.gate_moments = 105;
    wl.qubits = {97, 106, 107, 108};
    if (with_injection) {
        SpliceSpec splice;
        splice.tmpl = single_rule().tmpl;
        splice.binding = single_rule().binding;
        splice.moment = 51;
        wl.splices.push_back(splice);
    }
    return make_workload(spec.backend_id, spec.graph, wl, 77);
}

} // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";

    BackendSpec control = base_spec();
    write_file(dir + "/star_control.json", backend_spec_to_json_str(control) + "\n");

    BackendSpec single = base_spec();
    single.hidden_rules.push_back(single_rule());
    write_file(dir + "/star_single.json", backend_spec_to_json_str(single) + "\n");

    BackendSpec scaling = base_spec();
    scaling.hidden_rules.push_back(scaling_target_rule());
    scaling.hidden_rules.push_back(scaling_background_rule());
    write_file(dir + "/star_scaling.json", backend_spec_to_json_str(scaling) + "\n");

    write_file(dir + "/workload_clean.json",
               circuit_to_json_str(benchmark_workload(control, false)) + "\n");
    write_file(dir + "/workload_injected.json",
               circuit_to_json_str(benchmark_workload(single, true)) + "\n");
    return 0;
}
