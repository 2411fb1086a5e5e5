#include "sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "error.hpp"

namespace qrisk {

const GateNoise& NoiseModel::gate(GateKind kind) const {
    switch (kind) {
        case GateKind::Rz: return rz;
        case GateKind::Sx: return sx;
        case GateKind::X: return x;
        case GateKind::Cz: return cz;
        case GateKind::Measure: break;
    }
    raise(ErrorCode::Internal, "measure has no gate-noise entry");
}

QubitNoise NoiseModel::qubit(uint32_t q) const {
    auto it = qubits.find(q);
    return it == qubits.end() ? QubitNoise{} : it->second;
}

void validate(const NoiseModel& model) {
    auto check_gate = [](const char* name, const GateNoise& gn) {
        if (!(gn.p >= 0.0 && gn.p <= 1.0))
            raise(ErrorCode::InvalidArgument,
                  std::string(name) + ": depolarizing probability must be in [0, 1]");
        if (!(gn.duration >= 0.0))
            raise(ErrorCode::InvalidArgument, std::string(name) + ": duration must be >= 0");
    };
    check_gate("rz", model.rz);
    check_gate("sx", model.sx);
    check_gate("x", model.x);
    check_gate("cz", model.cz);
    if (!(model.measure_duration >= 0.0))
        raise(ErrorCode::InvalidArgument, "measure duration must be >= 0");
    for (const auto& [q, qn] : model.qubits) {
        const std::string where = "qubit " + std::to_string(q);
        if (!(qn.t1 > 0.0) || !(qn.t2 > 0.0))
            raise(ErrorCode::InvalidArgument, where + ": T1 and T2 must be positive");
        if (std::isfinite(qn.t1) && qn.t2 > 2.0 * qn.t1 + 1e-9)
            raise(ErrorCode::InvalidArgument, where + ": T2 must not exceed 2*T1");
        if (!(qn.ro01 >= 0.0 && qn.ro01 <= 1.0 && qn.ro10 >= 0.0 && qn.ro10 <= 1.0))
            raise(ErrorCode::InvalidArgument, where + ": readout probabilities must be in [0, 1]");
    }
}

void to_json(nlohmann::json& j, const NoiseModel& model) {
    nlohmann::json gates;
    auto put = [&gates](const char* name, const GateNoise& gn) {
        gates[name] = {{"p", gn.p}, {"dur", gn.duration}};
    };
    put("rz", model.rz);
    put("sx", model.sx);
    put("x", model.x);
    put("cz", model.cz);
    gates["measure"] = {{"dur", model.measure_duration}};
    nlohmann::json qubits(nlohmann::json::value_t::object);
    for (const auto& [q, qn] : model.qubits) {
        nlohmann::json entry = {{"ro01", qn.ro01}, {"ro10", qn.ro10}};
        // Infinity is not representable in JSON; omit disabled decay terms.
        if (std::isfinite(qn.t1)) entry["t1"] = qn.t1;
        if (std::isfinite(qn.t2)) entry["t2"] = qn.t2;
        qubits[std::to_string(q)] = entry;
    }
    j = nlohmann::json{{"gates", gates}, {"qubits", qubits}};
}

void from_json(const nlohmann::json& j, NoiseModel& model) {
    model = NoiseModel{};
    if (j.contains("gates")) {
        const auto& gates = j.at("gates");
        auto get = [&gates](const char* name, GateNoise& gn) {
            if (!gates.contains(name)) return;
            const auto& entry = gates.at(name);
            if (entry.contains("p")) gn.p = entry.at("p").get<double>();
            if (entry.contains("dur")) gn.duration = entry.at("dur").get<double>();
        };
        get("rz", model.rz);
        get("sx", model.sx);
        get("x", model.x);
        get("cz", model.cz);
        if (gates.contains("measure") && gates.at("measure").contains("dur"))
            model.measure_duration = gates.at("measure").at("dur").get<double>();
    }
    if (j.contains("qubits")) {
        for (const auto& [key, entry] : j.at("qubits").items()) {
            QubitNoise qn;
            if (entry.contains("t1")) qn.t1 = entry.at("t1").get<double>();
            if (entry.contains("t2")) qn.t2 = entry.at("t2").get<double>();
            if (entry.contains("ro01")) qn.ro01 = entry.at("ro01").get<double>();
            if (entry.contains("ro10")) qn.ro10 = entry.at("ro10").get<double>();
            model.qubits[uint32_t(std::stoul(key))] = qn;
        }
    }
}

NoiseModel noise_model_from_json_str(const std::string& json_text) {
    NoiseModel model;
    try {
        model = nlohmann::json::parse(json_text).get<NoiseModel>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad noise model JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        raise(ErrorCode::ParseError, std::string("bad noise model JSON: ") + e.what());
    }
    validate(model);
    return model;
}

std::string noise_model_to_json_str(const NoiseModel& model, int indent) {
    nlohmann::json j = model;
    return j.dump(indent) + "\n";
}

std::string distribution_to_json_str(const Distribution& dist, int indent) {
    nlohmann::json j{{"qubits", dist.qubits}, {"shots", dist.shots}, {"probs", dist.probs}};
    return j.dump(indent) + "\n";
}

double tvd(const Distribution& a, const Distribution& b) {
    if (a.qubits != b.qubits)
        raise(ErrorCode::InvalidArgument,
              "total variation distance requires identical measured-qubit sets");
    double sum = 0.0;
    auto ia = a.probs.begin();
    auto ib = b.probs.begin();
    while (ia != a.probs.end() || ib != b.probs.end()) {
        if (ib == b.probs.end() || (ia != a.probs.end() && ia->first < ib->first)) {
            sum += std::abs(ia->second);
            ++ia;
        } else if (ia == a.probs.end() || ib->first < ia->first) {
            sum += std::abs(ib->second);
            ++ib;
        } else {
            sum += std::abs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    return 0.5 * sum;
}

namespace detail {

TrajectoryState::TrajectoryState(const std::vector<uint32_t>& sorted_qubits)
    : n_(uint32_t(sorted_qubits.size())), qubits_(sorted_qubits) {
    amps_.assign(size_t(1) << n_, {0.0, 0.0});
    amps_[0] = {1.0, 0.0};
}

uint32_t TrajectoryState::local_index(uint32_t physical_qubit) const {
    auto it = std::lower_bound(qubits_.begin(), qubits_.end(), physical_qubit);
    if (it == qubits_.end() || *it != physical_qubit)
        raise(ErrorCode::Internal, "qubit not present in trajectory state");
    return uint32_t(it - qubits_.begin());
}

void TrajectoryState::apply_rz(uint32_t local, double angle) {
    const std::complex<double> phase0(std::cos(angle / 2), -std::sin(angle / 2));
    const std::complex<double> phase1(std::cos(angle / 2), std::sin(angle / 2));
    const size_t bit = size_t(1) << local;
    for (size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & bit) ? phase1 : phase0;
}

void TrajectoryState::apply_sx(uint32_t local) {
    // sqrt(X) = 0.5 * [[1+i, 1-i], [1-i, 1+i]]
    const std::complex<double> a(0.5, 0.5), b(0.5, -0.5);
    const size_t bit = size_t(1) << local;
    for (size_t base = 0; base < amps_.size(); ++base) {
        if (base & bit) continue;
        const std::complex<double> lo = amps_[base], hi = amps_[base | bit];
        amps_[base] = a * lo + b * hi;
        amps_[base | bit] = b * lo + a * hi;
    }
}

void TrajectoryState::apply_x(uint32_t local) {
    const size_t bit = size_t(1) << local;
    for (size_t base = 0; base < amps_.size(); ++base)
        if (!(base & bit)) std::swap(amps_[base], amps_[base | bit]);
}

void TrajectoryState::apply_cz(uint32_t local_a, uint32_t local_b) {
    const size_t mask = (size_t(1) << local_a) | (size_t(1) << local_b);
    for (size_t i = 0; i < amps_.size(); ++i)
        if ((i & mask) == mask) amps_[i] = -amps_[i];
}

void TrajectoryState::apply_pauli(uint32_t local, int which) {
    const size_t bit = size_t(1) << local;
    switch (which) {
        case 1:
            apply_x(local);
            break;
        case 2: // Y = iXZ
            for (size_t base = 0; base < amps_.size(); ++base) {
                if (base & bit) continue;
                const std::complex<double> lo = amps_[base], hi = amps_[base | bit];
                amps_[base] = std::complex<double>(0.0, -1.0) * hi;
                amps_[base | bit] = std::complex<double>(0.0, 1.0) * lo;
            }
            break;
        case 3:
            for (size_t i = 0; i < amps_.size(); ++i)
                if (i & bit) amps_[i] = -amps_[i];
            break;
        default:
            raise(ErrorCode::Internal, "bad pauli index");
    }
}

double TrajectoryState::prob_one(uint32_t local) const {
    const size_t bit = size_t(1) << local;
    double p = 0.0;
    for (size_t i = 0; i < amps_.size(); ++i)
        if (i & bit) p += std::norm(amps_[i]);
    return p;
}

int TrajectoryState::measure_collapse(uint32_t local, double u) {
    const double p1 = prob_one(local);
    const int outcome = u < p1 ? 1 : 0;
    const size_t bit = size_t(1) << local;
    const double norm = std::sqrt(outcome ? p1 : 1.0 - p1);
    const double scale = norm > 0.0 ? 1.0 / norm : 0.0;
    for (size_t i = 0; i < amps_.size(); ++i) {
        const bool one = (i & bit) != 0;
        if (one == (outcome == 1))
            amps_[i] *= scale;
        else
            amps_[i] = {0.0, 0.0};
    }
    return outcome;
}

void TrajectoryState::amplitude_damp(uint32_t local, double gamma, double u) {
    const double p1 = prob_one(local);
    const size_t bit = size_t(1) << local;
    if (u < gamma * p1) {
        // K1 = sqrt(gamma) |0><1|: the excited branch decays to ground.
        const double scale = 1.0 / std::sqrt(p1);
        for (size_t base = 0; base < amps_.size(); ++base) {
            if (base & bit) continue;
            amps_[base] = amps_[base | bit] * scale;
            amps_[base | bit] = {0.0, 0.0};
        }
    } else {
        // K0 = diag(1, sqrt(1-gamma)), renormalized by the branch weight.
        const double k = std::sqrt(1.0 - gamma);
        const double scale = 1.0 / std::sqrt(1.0 - gamma * p1);
        for (size_t i = 0; i < amps_.size(); ++i)
            amps_[i] *= (i & bit) ? k * scale : scale;
    }
}

void TrajectoryState::depolarize(const std::vector<uint32_t>& locals, Rng& rng) {
    if (locals.size() == 1) {
        apply_pauli(locals[0], 1 + int(rng.below(3)));
    } else {
        // One of the 15 non-identity two-qubit Paulis, uniformly.
        const int pick = 1 + int(rng.below(15));
        const int first = pick & 3, second = pick >> 2;
        if (first) apply_pauli(locals[0], first);
        if (second) apply_pauli(locals[1], second);
    }
}

namespace {

struct PreparedQubitNoise {
    // Indexed by gate kind (Rz, Sx, X, Cz, Measure).
    double gamma[5] = {0, 0, 0, 0, 0};
    double pz[5] = {0, 0, 0, 0, 0};
    bool any[5] = {false, false, false, false, false};
    double ro01 = 0.0, ro10 = 0.0;
};

struct Prepared {
    std::vector<uint32_t> sorted_qubits;
    std::vector<uint32_t> local_of_op_qubit; // flattened per-op local indices
    std::vector<uint32_t> op_qubit_offset;
    std::vector<PreparedQubitNoise> per_local;
    double depol[5] = {0, 0, 0, 0, 0};
};

Prepared prepare(const Circuit& circuit, const NoiseModel& model) {
    Prepared prep;
    auto used = circuit.used_qubits();
    prep.sorted_qubits.assign(used.begin(), used.end());
    if (prep.sorted_qubits.empty())
        raise(ErrorCode::InvalidArgument, "circuit has no operations");
    if (prep.sorted_qubits.size() > 12)
        raise(ErrorCode::CapacityExceeded,
              "sampling supports at most 12 used qubits, circuit uses " +
                  std::to_string(prep.sorted_qubits.size()));

    auto local_of = [&prep](uint32_t q) {
        return uint32_t(std::lower_bound(prep.sorted_qubits.begin(), prep.sorted_qubits.end(), q) -
                        prep.sorted_qubits.begin());
    };
    prep.op_qubit_offset.reserve(circuit.ops.size() + 1);
    prep.op_qubit_offset.push_back(0);
    for (const auto& op : circuit.ops) {
        for (uint32_t q : op.qubits) prep.local_of_op_qubit.push_back(local_of(q));
        prep.op_qubit_offset.push_back(uint32_t(prep.local_of_op_qubit.size()));
    }

    const GateKind kinds[5] = {GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cz,
                               GateKind::Measure};
    for (int k = 0; k < 4; ++k) prep.depol[k] = model.gate(kinds[k]).p;
    prep.depol[4] = 0.0;

    prep.per_local.resize(prep.sorted_qubits.size());
    for (size_t i = 0; i < prep.sorted_qubits.size(); ++i) {
        const QubitNoise qn = model.qubit(prep.sorted_qubits[i]);
        PreparedQubitNoise& pq = prep.per_local[i];
        pq.ro01 = qn.ro01;
        pq.ro10 = qn.ro10;
        for (int k = 0; k < 5; ++k) {
            const double dur = k == 4 ? model.measure_duration : model.gate(kinds[k]).duration;
            if (dur <= 0.0) continue;
            double gamma = 0.0, pz = 0.0;
            if (std::isfinite(qn.t1)) gamma = 1.0 - std::exp(-dur / qn.t1);
            if (std::isfinite(qn.t2)) {
                // Pure dephasing rate on top of the T1 contribution.
                const double t1_part = std::isfinite(qn.t1) ? 0.5 / qn.t1 : 0.0;
                const double rate = 1.0 / qn.t2 - t1_part;
                if (rate > 0.0) pz = 0.5 * (1.0 - std::exp(-dur * rate));
            }
            pq.gamma[k] = gamma;
            pq.pz[k] = pz;
            pq.any[k] = gamma > 0.0 || pz > 0.0;
        }
    }
    return prep;
}

int kind_index(GateKind kind) { return int(kind); }

std::map<std::string, uint64_t> run_shot_range(const Circuit& circuit, const Prepared& prep,
                                               uint64_t shot_begin, uint64_t shot_end,
                                               uint64_t seed, PostOpHook hook, void* ctx) {
    std::map<std::string, uint64_t> counts;
    const size_t n_measured = circuit.measured_qubits().size();
    std::string bits(n_measured, '0');
    for (uint64_t shot = shot_begin; shot < shot_end; ++shot) {
        Rng rng(hash_mix({seed, shot}));
        TrajectoryState state(prep.sorted_qubits);
        size_t bit_cursor = 0;
        for (uint32_t id = 0; id < circuit.ops.size(); ++id) {
            const Operation& op = circuit.ops[id];
            const int k = kind_index(op.kind);
            const uint32_t off = prep.op_qubit_offset[id];
            if (op.kind == GateKind::Measure) {
                const uint32_t local = prep.local_of_op_qubit[off];
                const PreparedQubitNoise& pq = prep.per_local[local];
                if (pq.any[4]) {
                    if (pq.gamma[4] > 0.0) state.amplitude_damp(local, pq.gamma[4], rng.uniform());
                    if (pq.pz[4] > 0.0 && rng.uniform() < pq.pz[4]) state.apply_pauli(local, 3);
                }
                int bit = state.measure_collapse(local, rng.uniform());
                const double flip = bit ? pq.ro10 : pq.ro01;
                if (flip > 0.0 && rng.uniform() < flip) bit ^= 1;
                bits[bit_cursor++] = char('0' + bit);
            } else {
                switch (op.kind) {
                    case GateKind::Rz:
                        state.apply_rz(prep.local_of_op_qubit[off], op.angle);
                        break;
                    case GateKind::Sx:
                        state.apply_sx(prep.local_of_op_qubit[off]);
                        break;
                    case GateKind::X:
                        state.apply_x(prep.local_of_op_qubit[off]);
                        break;
                    case GateKind::Cz:
                        state.apply_cz(prep.local_of_op_qubit[off],
                                       prep.local_of_op_qubit[off + 1]);
                        break;
                    default:
                        break;
                }
                if (prep.depol[k] > 0.0 && rng.uniform() < prep.depol[k]) {
                    std::vector<uint32_t> locals(prep.local_of_op_qubit.begin() + off,
                                                 prep.local_of_op_qubit.begin() +
                                                     prep.op_qubit_offset[id + 1]);
                    state.depolarize(locals, rng);
                }
                for (uint32_t qi = off; qi < prep.op_qubit_offset[id + 1]; ++qi) {
                    const uint32_t local = prep.local_of_op_qubit[qi];
                    const PreparedQubitNoise& pq = prep.per_local[local];
                    if (!pq.any[k]) continue;
                    if (pq.gamma[k] > 0.0) state.amplitude_damp(local, pq.gamma[k], rng.uniform());
                    if (pq.pz[k] > 0.0 && rng.uniform() < pq.pz[k]) state.apply_pauli(local, 3);
                }
            }
            if (hook) hook(ctx, id, rng, state);
        }
        ++counts[bits];
    }
    return counts;
}

std::atomic<unsigned> g_workers{1};

} // namespace

Distribution sample_trajectories(const Circuit& circuit, const NoiseModel& model, uint64_t shots,
                                 uint64_t seed, PostOpHook hook, void* ctx) {
    validate(circuit);
    validate(model);
    if (shots == 0) raise(ErrorCode::InvalidArgument, "shots must be positive");
    if (circuit.measured_qubits().empty())
        raise(ErrorCode::InvalidArgument, "circuit measures no qubits");
    const Prepared prep = prepare(circuit, model);

    const unsigned jobs = std::max(1u, std::min<unsigned>(worker_threads(), unsigned(shots)));
    std::map<std::string, uint64_t> counts;
    if (jobs == 1) {
        counts = run_shot_range(circuit, prep, 0, shots, seed, hook, ctx);
    } else {
        std::vector<std::map<std::string, uint64_t>> partial(jobs);
        std::vector<std::thread> threads;
        const uint64_t chunk = (shots + jobs - 1) / jobs;
        for (unsigned t = 0; t < jobs; ++t) {
            const uint64_t begin = t * chunk;
            const uint64_t end = std::min(shots, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&, t, begin, end] {
                partial[t] = run_shot_range(circuit, prep, begin, end, seed, hook, ctx);
            });
        }
        for (auto& th : threads) th.join();
        for (const auto& part : partial)
            for (const auto& [key, c] : part) counts[key] += c;
    }

    Distribution dist;
    dist.qubits = circuit.measured_qubits();
    dist.shots = shots;
    for (const auto& [key, c] : counts) dist.probs[key] = double(c) / double(shots);
    return dist;
}

} // namespace detail

Distribution noisy_sample(const Circuit& circuit, const NoiseModel& model, uint64_t shots,
                          uint64_t seed) {
    return detail::sample_trajectories(circuit, model, shots, seed, nullptr, nullptr);
}

Distribution ideal_distribution(const Circuit& circuit) {
    validate(circuit);
    const auto measured = circuit.measured_qubits();
    if (measured.empty())
        raise(ErrorCode::InvalidArgument, "circuit measures no qubits");
    auto used = circuit.used_qubits();
    if (used.size() > 12)
        raise(ErrorCode::CapacityExceeded,
              "ideal distribution supports at most 12 used qubits, circuit uses " +
                  std::to_string(used.size()));
    std::vector<uint32_t> sorted(used.begin(), used.end());
    detail::TrajectoryState state(sorted);
    for (const auto& op : circuit.ops) {
        switch (op.kind) {
            case GateKind::Rz:
                state.apply_rz(state.local_index(op.qubits[0]), op.angle);
                break;
            case GateKind::Sx:
                state.apply_sx(state.local_index(op.qubits[0]));
                break;
            case GateKind::X:
                state.apply_x(state.local_index(op.qubits[0]));
                break;
            case GateKind::Cz:
                state.apply_cz(state.local_index(op.qubits[0]), state.local_index(op.qubits[1]));
                break;
            case GateKind::Measure:
                break;
        }
    }
    std::vector<uint32_t> locals;
    for (uint32_t q : measured) locals.push_back(state.local_index(q));

    Distribution dist;
    dist.qubits = measured;
    const auto& amps = state.amplitudes();
    std::string key(measured.size(), '0');
    for (size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (p <= 0.0) continue;
        for (size_t b = 0; b < locals.size(); ++b)
            key[b] = char('0' + ((i >> locals[b]) & 1));
        dist.probs[key] += p;
    }
    return dist;
}

Unitary ideal_unitary(const Circuit& circuit) {
    validate(circuit);
    auto used = circuit.used_qubits();
    if (used.size() > 6)
        raise(ErrorCode::CapacityExceeded,
              "unitary extraction supports at most 6 used qubits, circuit uses " +
                  std::to_string(used.size()));
    if (used.empty()) raise(ErrorCode::InvalidArgument, "circuit has no operations");
    for (const auto& op : circuit.ops)
        if (op.kind == GateKind::Measure)
            raise(ErrorCode::InvalidArgument, "unitary extraction requires a measurement-free circuit");

    std::vector<uint32_t> sorted(used.begin(), used.end());
    const size_t dim = size_t(1) << sorted.size();
    Unitary u(dim, std::vector<std::complex<double>>(dim));
    for (size_t col = 0; col < dim; ++col) {
        detail::TrajectoryState state(sorted);
        // Prepare basis state |col> by flipping the set bits.
        for (uint32_t b = 0; b < sorted.size(); ++b)
            if ((col >> b) & 1) state.apply_x(b);
        for (const auto& op : circuit.ops) {
            switch (op.kind) {
                case GateKind::Rz:
                    state.apply_rz(state.local_index(op.qubits[0]), op.angle);
                    break;
                case GateKind::Sx:
                    state.apply_sx(state.local_index(op.qubits[0]));
                    break;
                case GateKind::X:
                    state.apply_x(state.local_index(op.qubits[0]));
                    break;
                case GateKind::Cz:
                    state.apply_cz(state.local_index(op.qubits[0]),
                                   state.local_index(op.qubits[1]));
                    break;
                case GateKind::Measure:
                    break;
            }
        }
        for (size_t row = 0; row < dim; ++row) u[row][col] = state.amplitudes()[row];
    }
    return u;
}

double unitary_distance(const Unitary& u, const Unitary& v) {
    if (u.size() != v.size())
        raise(ErrorCode::InvalidArgument, "unitary dimensions differ");
    const size_t dim = u.size();
    // Global phase estimate from the largest-magnitude entry of v.
    size_t bi = 0, bj = 0;
    double best = -1.0;
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j)
            if (std::norm(v[i][j]) > best) {
                best = std::norm(v[i][j]);
                bi = i;
                bj = j;
            }
    if (best <= 0.0) raise(ErrorCode::InvalidArgument, "zero matrix");
    std::complex<double> phase = u[bi][bj] / v[bi][bj];
    const double mag = std::abs(phase);
    if (mag == 0.0) return 2.0;
    phase /= mag;
    double worst = 0.0;
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j)
            worst = std::max(worst, std::abs(u[i][j] - phase * v[i][j]));
    return worst;
}

void set_worker_threads(unsigned n) {
    detail::g_workers.store(n == 0 ? 1 : n);
}

unsigned worker_threads() { return detail::g_workers.load(); }

} // namespace qrisk
