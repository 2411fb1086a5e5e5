// qrisk command-line tool. Thin shell over the C API: every subcommand loads
// its inputs, makes one library call, and emits the library's JSON unchanged
// except for a top-level "meta" block (command name, wall time, tool version)
// that reruns are allowed to differ in. Payloads outside "meta" are pure
// functions of (inputs, seed).
//
// Exit codes: 0 success (including a no_excess discovery), 1 domain errors
// (bad file contents, library failures), 2 usage errors (unknown flags,
// missing/invalid arguments, missing input files).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrisk/qrisk.h"

namespace {

using nlohmann::json;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raises a DomainError carrying the library's thread-local failure message.
void check(qrisk_status status) {
    if (status != QRISK_OK)
        throw DomainError(std::string(qrisk_last_error()) + " [status " +
                          std::to_string(static_cast<int>(status)) + "]");
}

/// Adopts a library-owned string and frees it on scope exit.
struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { qrisk_string_free(ptr); }
    std::string str() const { return ptr != nullptr ? std::string(ptr) : std::string(); }
};

using CircuitPtr = std::unique_ptr<qrisk_circuit, decltype(&qrisk_circuit_free)>;
using BackendPtr = std::unique_ptr<qrisk_backend, decltype(&qrisk_backend_free)>;
using ModelPtr = std::unique_ptr<qrisk_noise_model, decltype(&qrisk_noise_model_free)>;
using DbPtr = std::unique_ptr<qrisk_db, decltype(&qrisk_db_free)>;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw DomainError("cannot read " + path);
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw DomainError("cannot write " + path);
}

bool file_exists(const std::string& path) {
    return std::ifstream(path).good();
}

bool looks_like_json(const std::string& text) {
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') continue;
        return ch == '{';
    }
    return false;
}

/// Loads a circuit from JSON or the semicolon text form, sniffed by content.
CircuitPtr load_circuit(const std::string& path) {
    const std::string text = read_file(path);
    qrisk_circuit* raw = nullptr;
    check(looks_like_json(text) ? qrisk_circuit_from_json(text.c_str(), &raw)
                                : qrisk_circuit_from_text(text.c_str(), &raw));
    return CircuitPtr(raw, qrisk_circuit_free);
}

BackendPtr load_backend(const std::string& path) {
    qrisk_backend* raw = nullptr;
    check(qrisk_backend_from_json(read_file(path).c_str(), &raw));
    return BackendPtr(raw, qrisk_backend_free);
}

DbPtr load_db(const std::string& path) {
    qrisk_db* raw = nullptr;
    check(qrisk_db_load(path.c_str(), &raw));
    return DbPtr(raw, qrisk_db_free);
}

std::string circuit_json(const qrisk_circuit* c) {
    OwnedString s;
    check(qrisk_circuit_to_json(c, &s.ptr));
    return s.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Writes a circuit as text when the path ends in .txt, JSON otherwise.
void write_circuit(const qrisk_circuit* c, const std::string& path) {
    if (ends_with(path, ".txt")) {
        OwnedString s;
        check(qrisk_circuit_to_text(c, &s.ptr));
        write_file(path, s.str());
    } else {
        write_file(path, circuit_json(c) + "\n");
    }
}

/// Shared per-command context: where the payload goes and what lands in meta.
struct Emitter {
    std::string command;
    std::string out_path; ///< empty = stdout
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    /// Merges the meta block into the payload and writes it out. Returns the
    /// parsed payload so callers can build their stderr summary from it.
    json emit(const std::string& payload_json) const {
        json j = json::parse(payload_json);
        json& meta = j["meta"];
        if (!meta.is_object()) meta = json::object();
        meta["command"] = command;
        meta["tool_version"] = qrisk_version();
        meta["wall_ms"] = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        const std::string text = j.dump(2) + "\n";
        if (out_path.empty())
            std::fputs(text.c_str(), stdout);
        else
            write_file(out_path, text);
        return j;
    }
};

void note(const std::string& line) {
    std::fputs((line + "\n").c_str(), stderr);
}

std::string join_u32(const json& array) {
    std::string out;
    for (const auto& v : array) {
        if (!out.empty()) out += ",";
        out += std::to_string(v.get<uint64_t>());
    }
    return out;
}

/* ------------------------------------------------------- option plumbing */

/// Discovery/oracle knobs shared by calibrate, discover, and verify. Only
/// flags the user actually set are forwarded, so library defaults rule.
struct OracleFlags {
    uint32_t shots = 0;
    uint32_t null_runs = 0;
    double sigma_multiplier = 0.0;
    double floor_multiplier = 0.0;
    uint32_t segment_size = 0;
    uint32_t n_max = 0;
    CLI::Option* o_shots = nullptr;
    CLI::Option* o_null_runs = nullptr;
    CLI::Option* o_sigma = nullptr;
    CLI::Option* o_floor = nullptr;
    CLI::Option* o_segment = nullptr;
    CLI::Option* o_nmax = nullptr;

    void attach(CLI::App* cmd, bool with_search_knobs) {
        o_shots = cmd->add_option("--shots", shots, "Shots per oracle execution");
        o_null_runs =
            cmd->add_option("--null-runs", null_runs, "Null-distribution samples for tau");
        o_sigma = cmd->add_option("--sigma-multiplier", sigma_multiplier,
                                  "Null-spread multiplier in the tau threshold");
        o_floor = cmd->add_option("--floor-multiplier", floor_multiplier,
                                  "Shot-noise multiple under which denominators are degenerate");
        if (with_search_knobs) {
            o_segment = cmd->add_option("--segment-size", segment_size,
                                        "Moments per removable segment");
            o_nmax = cmd->add_option("--n-max", n_max, "Partition-count cap before giving up");
        }
    }

    std::string to_json() const {
        json j = json::object();
        if (o_shots->count() > 0) j["shots"] = shots;
        if (o_null_runs->count() > 0) j["null_runs"] = null_runs;
        if (o_sigma->count() > 0) j["sigma_multiplier"] = sigma_multiplier;
        if (o_floor->count() > 0) j["floor_multiplier"] = floor_multiplier;
        if (o_segment != nullptr && o_segment->count() > 0) j["segment_size"] = segment_size;
        if (o_nmax != nullptr && o_nmax->count() > 0) j["n_max"] = n_max;
        return j.dump();
    }
};

uint32_t g_jobs = 0;

void add_common(CLI::App* cmd, std::string& out_path) {
    cmd->add_option("--out", out_path, "Write the JSON report here instead of stdout");
    cmd->add_option("--jobs", g_jobs,
                    "Worker threads for window/circuit batches (0 = logical cores)")
        ->check(CLI::NonNegativeNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qrisk — discovery, verification, and disruption of "
                 "execution-dependent error patterns in compiled circuits"};
    app.require_subcommand(1);

    std::vector<std::function<void(Emitter&)>> runners(1);
    std::string out_path;

    /* ---------------------------------------------------------- grover */
    auto* grover = app.add_subcommand(
        "grover", "Compile a 3-qubit Grover search to the native gate set");
    {
        auto marked = std::make_shared<std::string>();
        auto iterations = std::make_shared<uint32_t>(2);
        auto hub = std::make_shared<uint32_t>(107);
        auto leaves = std::make_shared<std::vector<uint32_t>>(std::vector<uint32_t>{97, 106, 108});
        auto qubits = std::make_shared<uint32_t>(110);
        auto backend_id = std::make_shared<std::string>("mock_star");
        grover->add_option("--marked", *marked, "Marked 3-bit string, e.g. 101")->required();
        grover->add_option("--iterations", *iterations, "Grover iterations (default 2)");
        grover->add_option("--hub", *hub, "Physical qubit used as the workspace hub");
        grover->add_option("--leaves", *leaves, "Three physical data qubits on the star")
            ->expected(3);
        grover->add_option("--qubits", *qubits,
                           "Physical qubit count of the target device (0 = fit layout)");
        grover->add_option("--backend-id", *backend_id, "Backend id stamped into the circuit");
        add_common(grover, out_path);
        runners.push_back([=](Emitter& em) {
            qrisk_circuit* raw = nullptr;
            check(qrisk_grover(marked->c_str(), *iterations, *hub, leaves->data(), *qubits,
                               backend_id->c_str(), &raw));
            CircuitPtr circuit(raw, qrisk_circuit_free);
            json j = em.emit(circuit_json(circuit.get()));
            note("grover: " + std::to_string(j["ops"].size()) + " native ops targeting " +
                 j["backend_id"].get<std::string>());
        });
    }

    /* ------------------------------------------------------- calibrate */
    auto* calibrate = app.add_subcommand(
        "calibrate", "Measure the null threshold of the discrepancy oracle for a circuit");
    {
        auto circuit_path = std::make_shared<std::string>();
        auto noise_path = std::make_shared<std::string>();
        auto backend_path = std::make_shared<std::string>();
        auto window = std::make_shared<uint32_t>(0);
        auto seed = std::make_shared<uint64_t>();
        auto flags = std::make_shared<OracleFlags>();
        calibrate->add_option("--circuit", *circuit_path, "Circuit file (JSON or text)")
            ->required()
            ->check(CLI::ExistingFile);
        auto* noise_opt =
            calibrate->add_option("--noise", *noise_path, "Noise model JSON to calibrate against")
                ->check(CLI::ExistingFile);
        auto* backend_opt =
            calibrate
                ->add_option("--backend", *backend_path,
                             "Backend spec JSON; uses the window's exported calibration")
                ->check(CLI::ExistingFile)
                ->excludes(noise_opt);
        noise_opt->excludes(backend_opt);
        calibrate->add_option("--window", *window, "Calibration window index (with --backend)");
        calibrate->add_option("--seed", *seed, "Deterministic seed")->required();
        flags->attach(calibrate, false);
        add_common(calibrate, out_path);
        runners.push_back([=](Emitter& em) {
            if (noise_opt->count() == 0 && backend_opt->count() == 0)
                throw CLI::RequiredError("--noise or --backend");
            auto circuit = load_circuit(*circuit_path);
            ModelPtr model(nullptr, qrisk_noise_model_free);
            if (noise_opt->count() > 0) {
                qrisk_noise_model* raw = nullptr;
                check(qrisk_noise_model_from_json(read_file(*noise_path).c_str(), &raw));
                model.reset(raw);
            } else {
                auto backend = load_backend(*backend_path);
                qrisk_noise_model* raw = nullptr;
                check(qrisk_backend_window_calibration(backend.get(), *window, *seed, &raw));
                model.reset(raw);
            }
            OwnedString result;
            check(qrisk_calibrate(circuit.get(), model.get(), flags->to_json().c_str(), *seed,
                                  &result.ptr));
            json j = em.emit(result.str());
            note("calibrate: tau=" + j["tau"].dump() + " tvd_min=" + j["tvd_min"].dump() +
                 " over " + std::to_string(j["null_ratios"].size()) + " null runs");
        });
    }

    /* -------------------------------------------------------- discover */
    auto* discover = app.add_subcommand(
        "discover", "Delta-debug a circuit against one calibration window of a backend");
    {
        auto circuit_path = std::make_shared<std::string>();
        auto backend_path = std::make_shared<std::string>();
        auto window = std::make_shared<uint32_t>(0);
        auto seed = std::make_shared<uint64_t>();
        auto flags = std::make_shared<OracleFlags>();
        discover->add_option("--circuit", *circuit_path, "Circuit file (JSON or text)")
            ->required()
            ->check(CLI::ExistingFile);
        discover->add_option("--backend", *backend_path, "Backend spec JSON")
            ->required()
            ->check(CLI::ExistingFile);
        discover->add_option("--window", *window, "Calibration window index");
        discover->add_option("--seed", *seed, "Deterministic master seed")->required();
        flags->attach(discover, true);
        add_common(discover, out_path);
        runners.push_back([=](Emitter& em) {
            auto circuit = load_circuit(*circuit_path);
            auto backend = load_backend(*backend_path);
            OwnedString result;
            check(qrisk_discover(circuit.get(), backend.get(), *window,
                                 flags->to_json().c_str(), *seed, &result.ptr));
            json j = em.emit(result.str());
            note("discover: status=" + j["status"].get<std::string>() + " flagged=[" +
                 join_u32(j["flagged_segments"]) + "] baseline_R=" + j["baseline_R"].dump() +
                 " oracle_calls=" + j["oracle_calls"].dump());
        });
    }

    /* ---------------------------------------------------------- verify */
    auto* verify = app.add_subcommand(
        "verify", "Re-run discovery across independent calibration windows");
    {
        auto circuit_path = std::make_shared<std::string>();
        auto backend_path = std::make_shared<std::string>();
        auto windows = std::make_shared<uint32_t>();
        auto seed = std::make_shared<uint64_t>();
        auto csv_path = std::make_shared<std::string>();
        auto flags = std::make_shared<OracleFlags>();
        verify->add_option("--circuit", *circuit_path, "Circuit file (JSON or text)")
            ->required()
            ->check(CLI::ExistingFile);
        verify->add_option("--backend", *backend_path, "Backend spec JSON")
            ->required()
            ->check(CLI::ExistingFile);
        verify->add_option("--windows", *windows, "Number of calibration windows (>= 2)")
            ->required();
        verify->add_option("--seed", *seed, "Deterministic master seed")->required();
        verify->add_option("--csv", *csv_path, "Also write the per-window flag table as CSV");
        flags->attach(verify, true);
        add_common(verify, out_path);
        runners.push_back([=](Emitter& em) {
            auto circuit = load_circuit(*circuit_path);
            auto backend = load_backend(*backend_path);
            OwnedString result;
            OwnedString csv;
            check(qrisk_verify(circuit.get(), backend.get(), *windows, flags->to_json().c_str(),
                               *seed, &result.ptr, csv_path->empty() ? nullptr : &csv.ptr));
            if (!csv_path->empty()) write_file(*csv_path, csv.str());
            json j = em.emit(result.str());
            std::map<uint64_t, uint32_t> tally;
            for (const auto& w : j["windows"])
                for (const auto& s : w["flagged_segments"]) tally[s.get<uint64_t>()]++;
            std::string counts;
            for (const auto& [seg, n] : tally) {
                if (!counts.empty()) counts += " ";
                counts += "seg" + std::to_string(seg) + ":" + std::to_string(n) + "/" +
                          std::to_string(j["windows"].size());
            }
            note("verify: " + std::to_string(j["windows"].size()) + " windows; flags: " +
                 (counts.empty() ? "none" : counts));
        });
    }

    /* --------------------------------------------------------- promote */
    auto* promote = app.add_subcommand(
        "promote", "Move persistent flagged segments from a verify report into a pattern DB");
    {
        auto report_path = std::make_shared<std::string>();
        auto db_path = std::make_shared<std::string>();
        auto min_consistency = std::make_shared<double>(0.7);
        promote->add_option("--report", *report_path, "Persistence report JSON from verify")
            ->required()
            ->check(CLI::ExistingFile);
        promote->add_option("--db", *db_path, "Pattern DB path; created when absent")
            ->required();
        promote->add_option("--min-consistency", *min_consistency,
                            "Minimum flagged-window fraction for promotion");
        add_common(promote, out_path);
        runners.push_back([=](Emitter& em) {
            DbPtr db(nullptr, qrisk_db_free);
            if (file_exists(*db_path)) {
                db = load_db(*db_path);
            } else {
                qrisk_db* raw = nullptr;
                check(qrisk_db_create(&raw));
                db.reset(raw);
            }
            OwnedString result;
            check(qrisk_promote(read_file(*report_path).c_str(), *min_consistency, db.get(),
                                &result.ptr));
            check(qrisk_db_save(db.get(), db_path->c_str()));
            OwnedString db_json;
            check(qrisk_db_to_json(db.get(), &db_json.ptr));
            json j = em.emit(result.str());
            note("promote: " + j["promoted"].dump() + " entries promoted; " + *db_path +
                 " now holds " +
                 std::to_string(json::parse(db_json.str())["entries"].size()) + " patterns");
        });
    }

    /* ------------------------------------------------------------ scan */
    auto* scan = app.add_subcommand(
        "scan", "List occurrences of DB patterns in a circuit");
    {
        auto circuit_path = std::make_shared<std::string>();
        auto db_path = std::make_shared<std::string>();
        scan->add_option("--circuit", *circuit_path, "Circuit file (JSON or text)")
            ->required()
            ->check(CLI::ExistingFile);
        scan->add_option("--db", *db_path, "Pattern DB JSON")
            ->required()
            ->check(CLI::ExistingFile);
        add_common(scan, out_path);
        runners.push_back([=](Emitter& em) {
            auto circuit = load_circuit(*circuit_path);
            auto db = load_db(*db_path);
            OwnedString result;
            check(qrisk_scan(circuit.get(), db.get(), &result.ptr));
            json j = em.emit(result.str());
            note("scan: " + j["count"].dump() + " occurrences");
        });
    }

    /* ------------------------------------------------------- transform */
    auto* transform = app.add_subcommand(
        "transform", "Break DB pattern occurrences with commuting adjacent swaps");
    {
        auto circuit_path = std::make_shared<std::string>();
        auto db_path = std::make_shared<std::string>();
        auto max_disruptions = std::make_shared<uint32_t>(UINT32_MAX);
        auto out_circuit = std::make_shared<std::string>();
        transform->add_option("--circuit", *circuit_path, "Circuit file (JSON or text)")
            ->required()
            ->check(CLI::ExistingFile);
        transform->add_option("--db", *db_path, "Pattern DB JSON")
            ->required()
            ->check(CLI::ExistingFile);
        transform->add_option("--max-disruptions", *max_disruptions,
                              "Stop after breaking this many occurrences");
        transform->add_option("--out-circuit", *out_circuit,
                              "Write the rewritten circuit here (.txt = text form)");
        add_common(transform, out_path);
        runners.push_back([=](Emitter& em) {
            auto circuit = load_circuit(*circuit_path);
            auto db = load_db(*db_path);
            qrisk_circuit* raw = nullptr;
            OwnedString result;
            check(qrisk_disrupt(circuit.get(), db.get(), *max_disruptions, &raw, &result.ptr));
            CircuitPtr rewritten(raw, qrisk_circuit_free);
            if (!out_circuit->empty()) write_circuit(rewritten.get(), *out_circuit);
            json j = em.emit(result.str());
            note("transform: " + j["disrupted"].dump() + " of " +
                 j["initial_occurrences"].dump() + " occurrences broken, " +
                 std::to_string(j["undisruptable"].size()) + " left, " +
                 std::to_string(j["swaps_applied"].size()) + " swaps");
        });
    }

    /* ------------------------------------------------------ experiment */
    auto* experiment = app.add_subcommand(
        "experiment", "Survivor-count scaling study against an injected backend");
    {
        auto backend_path = std::make_shared<std::string>();
        auto seed = std::make_shared<uint64_t>();
        auto circuits = std::make_shared<uint32_t>(0);
        auto shots = std::make_shared<uint32_t>(0);
        auto gate_moments = std::make_shared<uint32_t>(0);
        auto fill_prob = std::make_shared<double>(0.0);
        auto cz_prob = std::make_shared<double>(0.0);
        auto alpha = std::make_shared<double>(0.0);
        auto csv_path = std::make_shared<std::string>();
        auto plot_path = std::make_shared<std::string>();
        experiment->add_option("--backend", *backend_path, "Backend spec JSON with hidden rules")
            ->required()
            ->check(CLI::ExistingFile);
        experiment->add_option("--seed", *seed, "Deterministic master seed")->required();
        auto* o_circuits =
            experiment->add_option("--circuits", *circuits, "Base workloads (4 variants each)");
        auto* o_shots = experiment->add_option("--shots", *shots, "Shots per execution");
        auto* o_moments =
            experiment->add_option("--gate-moments", *gate_moments, "Workload depth in moments");
        auto* o_fill = experiment->add_option("--fill-prob", *fill_prob,
                                              "Filler probability per idle qubit per moment");
        auto* o_cz = experiment->add_option("--cz-prob", *cz_prob,
                                            "Two-qubit share of filler gates");
        auto* o_alpha = experiment->add_option("--alpha", *alpha, "Significance level");
        experiment->add_option("--csv", *csv_path, "Also write the row table as CSV");
        experiment->add_option("--plot-data", *plot_path,
                               "Also write gnuplot-ready scatter data");
        add_common(experiment, out_path);
        runners.push_back([=](Emitter& em) {
            auto backend = load_backend(*backend_path);
            json opts = json::object();
            if (o_circuits->count() > 0) opts["circuits"] = *circuits;
            if (o_shots->count() > 0) opts["shots"] = *shots;
            if (o_moments->count() > 0) opts["gate_moments"] = *gate_moments;
            if (o_fill->count() > 0) opts["fill_prob"] = *fill_prob;
            if (o_cz->count() > 0) opts["cz_prob"] = *cz_prob;
            if (o_alpha->count() > 0) opts["alpha"] = *alpha;
            OwnedString result;
            OwnedString csv;
            OwnedString plot;
            check(qrisk_scaling_experiment(backend.get(), opts.dump().c_str(), *seed,
                                           &result.ptr, csv_path->empty() ? nullptr : &csv.ptr,
                                           plot_path->empty() ? nullptr : &plot.ptr));
            if (!csv_path->empty()) write_file(*csv_path, csv.str());
            if (!plot_path->empty()) write_file(*plot_path, plot.str());
            json j = em.emit(result.str());
            char line[256];
            std::snprintf(line, sizeof line,
                          "experiment: rho=%.3f (p=%.2e) blind_rho=%.3f (p=%.2f) U=%.1f "
                          "(p=%.2e) reduction=%.1f%%",
                          j["spearman"]["rho"].get<double>(), j["spearman"]["p"].get<double>(),
                          j["spearman_blind"]["rho"].get<double>(),
                          j["spearman_blind"]["p"].get<double>(),
                          j["mann_whitney_0_vs_3"]["U"].get<double>(),
                          j["mann_whitney_0_vs_3"]["p"].get<double>(),
                          100.0 * j["reduction_3_to_0"].get<double>());
            note(line);
        });
    }

    const std::vector<CLI::App*> order{grover,  calibrate, discover,  verify,
                                       promote, scan,      transform, experiment};

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    qrisk_set_jobs(g_jobs);

    for (size_t i = 0; i < order.size(); ++i) {
        if (!order[i]->parsed()) continue;
        Emitter em;
        em.command = order[i]->get_name();
        em.out_path = out_path;
        try {
            runners[i + 1](em);
        } catch (const CLI::Error& e) {
            std::fputs((std::string("error: ") + e.what() + "\n").c_str(), stderr);
            return 2;
        } catch (const std::exception& e) {
            std::fputs((std::string("error: ") + e.what() + "\n").c_str(), stderr);
            return 1;
        }
        return 0;
    }
    std::fputs("error: no subcommand\n", stderr);
    return 2;
}
