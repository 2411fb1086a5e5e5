#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "rng.hpp"

namespace qrisk {

struct GateNoise {
    double p = 0.0;        // depolarizing probability per application
    double duration = 0.0; // time units for thermal relaxation
};

struct QubitNoise {
    double t1 = std::numeric_limits<double>::infinity();
    double t2 = std::numeric_limits<double>::infinity();
    double ro01 = 0.0; // P(read 1 | prepared 0)
    double ro10 = 0.0; // P(read 0 | prepared 1)
};

/// Everything the sampler knows about a device. RZ is virtual (zero duration,
/// typically zero error); durations default to the fixed device timings.
struct NoiseModel {
    GateNoise rz{0.0, 0.0};
    GateNoise sx{0.0, 32.0};
    GateNoise x{0.0, 32.0};
    GateNoise cz{0.0, 68.0};
    double measure_duration = 1000.0;
    std::map<uint32_t, QubitNoise> qubits;

    const GateNoise& gate(GateKind kind) const;
    QubitNoise qubit(uint32_t q) const; // defaults for unlisted qubits
};

void validate(const NoiseModel& model);
NoiseModel noise_model_from_json_str(const std::string& json_text);
std::string noise_model_to_json_str(const NoiseModel& model, int indent = 2);

/// Outcome distribution over the measured qubits. Bitstring position 0 is the
/// first-measured qubit (most significant bit). shots == 0 marks an exact
/// (analytic) distribution.
struct Distribution {
    std::vector<uint32_t> qubits;
    std::map<std::string, double> probs;
    uint64_t shots = 0;
};

std::string distribution_to_json_str(const Distribution& dist, int indent = 2);

/// Total variation distance over the union of supports. Throws if the two
/// distributions measure different qubit sets.
double tvd(const Distribution& a, const Distribution& b);

/// Exact Born distribution of the noiseless circuit (<= 12 used qubits).
Distribution ideal_distribution(const Circuit& circuit);

/// Dense unitary over the used qubits, sorted ascending; basis index bit k is
/// the k-th smallest used qubit. Requires <= 6 used qubits and no MEASURE.
using Unitary = std::vector<std::vector<std::complex<double>>>;
Unitary ideal_unitary(const Circuit& circuit);

/// Max-norm of U V^dagger - phase*I, minimized over the global phase; two
/// circuits are equivalent when this is ~0.
double unitary_distance(const Unitary& u, const Unitary& v);

/// Monte Carlo Kraus-trajectory sampler: per-gate depolarizing, per-qubit
/// thermal relaxation over each gate's duration, readout flips at
/// measurement. Each trajectory's RNG stream derives from (seed, trajectory
/// index), so results do not depend on execution schedule.
Distribution noisy_sample(const Circuit& circuit, const NoiseModel& model, uint64_t shots,
                          uint64_t seed);

/// Worker threads used to batch trajectories (results are schedule
/// independent). Default 1.
void set_worker_threads(unsigned n);
unsigned worker_threads();

namespace detail {

/// Hook for hardware-style execution: runs after the op at op_id (and its
/// modeled noise) has been applied to a trajectory.
class TrajectoryState;
using PostOpHook = void (*)(void* ctx, uint32_t op_id, Rng& rng, TrajectoryState& state);

Distribution sample_trajectories(const Circuit& circuit, const NoiseModel& model,
                                 uint64_t shots, uint64_t seed, PostOpHook hook, void* ctx);

/// Statevector over compacted qubits, exposed for the firing hook.
class TrajectoryState {
  public:
    TrajectoryState(const std::vector<uint32_t>& sorted_qubits);

    uint32_t local_index(uint32_t physical_qubit) const;
    void apply_rz(uint32_t local, double angle);
    void apply_sx(uint32_t local);
    void apply_x(uint32_t local);
    void apply_cz(uint32_t local_a, uint32_t local_b);
    void apply_pauli(uint32_t local, int which); // 1=X, 2=Y, 3=Z
    double prob_one(uint32_t local) const;
    /// Samples and collapses the qubit; returns the outcome bit.
    int measure_collapse(uint32_t local, double u);
    /// Amplitude damping branch choice for one trajectory step.
    void amplitude_damp(uint32_t local, double gamma, double u);
    /// Uniform non-identity Pauli on one or two qubits (depolarizing draw).
    void depolarize(const std::vector<uint32_t>& locals, Rng& rng);

    uint32_t num_qubits() const { return n_; }
    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

  private:
    uint32_t n_;
    std::vector<uint32_t> qubits_; // sorted physical indices
    std::vector<std::complex<double>> amps_;
};

} // namespace detail

} // namespace qrisk
