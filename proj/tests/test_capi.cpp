// Exercises the C ABI: handle lifecycles, JSON round trips across the
// boundary, status-code mapping, last_error reporting, and determinism of the
// pipeline entry points. Deep algorithm behavior is covered by the C++ unit
// tests; here the subject is the boundary itself.

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrisk/qrisk.h"

#include "circuit.hpp"
#include "hardware.hpp"
#include "patterns.hpp"

namespace {

using nlohmann::json;

/// Owns a char* returned through a C API out-parameter.
struct CStr {
    char* ptr = nullptr;
    ~CStr() { qrisk_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string{} : std::string(ptr); }
};

qrisk::Circuit two_segment_circuit() {
    qrisk::Circuit c;
    c.backend_id = "mock_tiny";
    c.num_physical_qubits = 4;
    c.ops = {
        {qrisk::GateKind::Sx, 0.0, {0}},      {qrisk::GateKind::Sx, 0.0, {0}},
        {qrisk::GateKind::Cz, 0.0, {0, 1}},   {qrisk::GateKind::X, 0.0, {1}},
        {qrisk::GateKind::Measure, 0.0, {0}}, {qrisk::GateKind::Measure, 0.0, {1}},
    };
    return c;
}

qrisk::BackendSpec tiny_clean_spec() {
    qrisk::BackendSpec spec;
    spec.backend_id = "mock_tiny";
    spec.graph.num_qubits = 4;
    spec.graph.add_edge(0, 1);
    spec.graph.add_edge(1, 2);
    spec.graph.add_edge(2, 3);
    spec.base_calibration.sx = {1e-4, 32.0};
    spec.base_calibration.x = {1e-4, 32.0};
    spec.base_calibration.cz = {5e-4, 68.0};
    spec.base_calibration.measure_duration = 1000.0;
    for (uint32_t q = 0; q < 4; ++q)
        spec.base_calibration.qubits[q] = {800000.0, 600000.0, 0.02, 0.02};
    spec.drift.sigma_mult = 0.05;
    spec.drift.transient_prob = 0.0;
    return spec;
}

/// A persistence report whose first segment was flagged in 8 of 10 windows
/// and whose second segment (one gate op) cannot form a template.
std::string promotable_report_json() {
    qrisk::PersistenceReport report;
    report.backend_id = "mock_tiny";
    report.master_seed = 42;
    report.circuit = two_segment_circuit();
    report.segments =
        qrisk::group_segments(qrisk::partition_into_moments(report.circuit), 3);
    for (uint32_t w = 0; w < 10; ++w) {
        qrisk::WindowOutcome outcome;
        outcome.window_index = w;
        outcome.window_uid = 1000 + w;
        outcome.oracle_calls = 5;
        if (w < 8) {
            outcome.status = qrisk::DiscoveryStatus::Found;
            outcome.flagged_segments = {0, 1};
        } else {
            outcome.status = qrisk::DiscoveryStatus::NoExcess;
        }
        report.windows.push_back(outcome);
    }
    return qrisk::persistence_report_to_json_str(report);
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_SUITE_BEGIN("capi");

TEST_CASE("version and pristine error state") {
    const char* version = qrisk_version();
    REQUIRE(version != nullptr);
    CHECK(std::string(version).find('.') != std::string::npos);

    // No qrisk call has failed on this thread yet.
    const char* err = qrisk_last_error();
    REQUIRE(err != nullptr);
    CHECK(std::string(err).empty());

    qrisk_string_free(nullptr); // must be a no-op

    qrisk_set_jobs(2);
    qrisk_set_jobs(0); // back to the default
}

TEST_CASE("circuit crosses the boundary intact") {
    const auto reference = two_segment_circuit();
    const std::string reference_json = qrisk::circuit_to_json_str(reference);

    qrisk_circuit* c = nullptr;
    REQUIRE(qrisk_circuit_from_json(reference_json.c_str(), &c) == QRISK_OK);
    REQUIRE(c != nullptr);

    CStr as_json;
    REQUIRE(qrisk_circuit_to_json(c, &as_json.ptr) == QRISK_OK);
    CHECK(as_json.str() == reference_json);

    CStr as_text;
    REQUIRE(qrisk_circuit_to_text(c, &as_text.ptr) == QRISK_OK);
    CHECK(as_text.str().find("backend: mock_tiny;") != std::string::npos);

    qrisk_circuit* reparsed = nullptr;
    REQUIRE(qrisk_circuit_from_text(as_text.ptr, &reparsed) == QRISK_OK);
    CStr reparsed_json;
    REQUIRE(qrisk_circuit_to_json(reparsed, &reparsed_json.ptr) == QRISK_OK);
    CHECK(reparsed_json.str() == reference_json);

    qrisk_circuit_free(reparsed);
    qrisk_circuit_free(c);
}

TEST_CASE("failures map to status codes and fill last_error") {
    qrisk_circuit* c = nullptr;

    SUBCASE("malformed json") {
        CHECK(qrisk_circuit_from_json("{nope", &c) == QRISK_PARSE_ERROR);
        CHECK_FALSE(std::string(qrisk_last_error()).empty());
        CHECK(c == nullptr);
    }
    SUBCASE("wrong json shape") {
        CHECK(qrisk_circuit_from_json("[1, 2, 3]", &c) == QRISK_PARSE_ERROR);
        CHECK_FALSE(std::string(qrisk_last_error()).empty());
    }
    SUBCASE("null arguments") {
        CHECK(qrisk_circuit_from_json(nullptr, &c) == QRISK_INVALID_ARGUMENT);
        CHECK(std::string(qrisk_last_error()) == "null argument");
        CHECK(qrisk_circuit_from_json("{}", nullptr) == QRISK_INVALID_ARGUMENT);
        CHECK(qrisk_circuit_to_json(nullptr, nullptr) == QRISK_INVALID_ARGUMENT);
        CHECK(qrisk_db_save(nullptr, "x.json") == QRISK_INVALID_ARGUMENT);
        CHECK(qrisk_scan(nullptr, nullptr, nullptr) == QRISK_INVALID_ARGUMENT);
    }
    SUBCASE("db format version") {
        qrisk_db* db = nullptr;
        CHECK(qrisk_db_from_json("{\"format_version\": 2, \"entries\": []}", &db) ==
              QRISK_VERSION_MISMATCH);
        CHECK_FALSE(std::string(qrisk_last_error()).empty());
    }
    SUBCASE("missing db file") {
        qrisk_db* db = nullptr;
        const auto path = temp_file("qrisk_capi_definitely_missing.json");
        std::filesystem::remove(path);
        CHECK(qrisk_db_load(path.string().c_str(), &db) == QRISK_IO_ERROR);
        CHECK_FALSE(std::string(qrisk_last_error()).empty());
    }
    SUBCASE("bad grover arguments") {
        const uint32_t leaves[3] = {0, 1, 2};
        CHECK(qrisk_grover("10", 2, 3, leaves, 0, "mock_tiny", &c) ==
              QRISK_INVALID_ARGUMENT);
        CHECK(qrisk_grover("101", 2, 3, nullptr, 0, "mock_tiny", &c) ==
              QRISK_INVALID_ARGUMENT);
        CHECK(c == nullptr);
    }
}

TEST_CASE("grover builder emits a native circuit for the requested device") {
    const uint32_t leaves[3] = {5, 6, 7};
    qrisk_circuit* c = nullptr;
    REQUIRE(qrisk_grover("101", 2, 4, leaves, 0, "mock_tiny", &c) == QRISK_OK);

    CStr as_json;
    REQUIRE(qrisk_circuit_to_json(c, &as_json.ptr) == QRISK_OK);
    const auto parsed = qrisk::circuit_from_json_str(as_json.str());
    CHECK(parsed.backend_id == "mock_tiny");
    CHECK(parsed.num_physical_qubits == 8); // sized to the largest layout qubit
    CHECK(parsed.ops.size() > 10);
    CHECK(parsed.measured_qubits() == std::vector<uint32_t>{5, 6, 7});
    CHECK_NOTHROW(qrisk::validate(parsed));

    // Text form parses back to the same circuit.
    CStr as_text;
    REQUIRE(qrisk_circuit_to_text(c, &as_text.ptr) == QRISK_OK);
    qrisk_circuit* reparsed = nullptr;
    REQUIRE(qrisk_circuit_from_text(as_text.ptr, &reparsed) == QRISK_OK);
    CStr reparsed_json;
    REQUIRE(qrisk_circuit_to_json(reparsed, &reparsed_json.ptr) == QRISK_OK);
    CHECK(reparsed_json.str() == as_json.str());

    qrisk_circuit_free(reparsed);
    qrisk_circuit_free(c);
}

TEST_CASE("pattern db lifecycle: create, promote, save, load, merge, scan") {
    qrisk_db* db = nullptr;
    REQUIRE(qrisk_db_create(&db) == QRISK_OK);

    CStr empty_json;
    REQUIRE(qrisk_db_to_json(db, &empty_json.ptr) == QRISK_OK);
    {
        const auto j = json::parse(empty_json.str());
        CHECK(j.at("format_version").get<uint32_t>() == 1);
        CHECK(j.at("entries").empty());
    }

    const std::string report_json = promotable_report_json();

    SUBCASE("promotion adds an entry and reports the untemplatable segment") {
        CStr promote_out;
        REQUIRE(qrisk_promote(report_json.c_str(), 0.7, db, &promote_out.ptr) == QRISK_OK);
        const auto j = json::parse(promote_out.str());
        CHECK(j.at("promoted").get<uint32_t>() == 1);
        CHECK(j.at("skipped_segments") == json::array({1}));

        CStr db_json;
        REQUIRE(qrisk_db_to_json(db, &db_json.ptr) == QRISK_OK);
        const auto loaded = qrisk::db_from_json_str(db_json.str());
        REQUIRE(loaded.entries.size() == 1);
        CHECK(loaded.entries[0].backend_id == "mock_tiny");
        CHECK(loaded.entries[0].qubit_tuple == std::vector<uint32_t>{0, 1});
        CHECK(loaded.entries[0].windows_flagged == 8);
        CHECK(loaded.entries[0].windows_total == 10);

        // The promoted pattern is found right back in the source circuit.
        const std::string circuit_json =
            qrisk::circuit_to_json_str(two_segment_circuit());
        qrisk_circuit* c = nullptr;
        REQUIRE(qrisk_circuit_from_json(circuit_json.c_str(), &c) == QRISK_OK);
        CStr scan_out;
        REQUIRE(qrisk_scan(c, db, &scan_out.ptr) == QRISK_OK);
        const auto occurrences = json::parse(scan_out.str());
        CHECK(occurrences.at("count").get<uint32_t>() == 1);
        REQUIRE(occurrences.at("occurrences").size() == 1);
        CHECK(occurrences.at("occurrences")[0].at("entry_index").get<uint32_t>() == 0);
        CHECK(occurrences.at("occurrences")[0].at("op_ids") == json::array({0, 1, 2}));
        qrisk_circuit_free(c);

        // Round trip through the filesystem.
        const auto path = temp_file("qrisk_capi_db_roundtrip.json");
        REQUIRE(qrisk_db_save(db, path.string().c_str()) == QRISK_OK);
        qrisk_db* loaded_db = nullptr;
        REQUIRE(qrisk_db_load(path.string().c_str(), &loaded_db) == QRISK_OK);
        CStr loaded_json;
        REQUIRE(qrisk_db_to_json(loaded_db, &loaded_json.ptr) == QRISK_OK);
        CHECK(loaded_json.str() == db_json.str());

        // Merging the same evidence back in changes nothing.
        REQUIRE(qrisk_db_merge(loaded_db, db) == QRISK_OK);
        CStr merged_json;
        REQUIRE(qrisk_db_to_json(loaded_db, &merged_json.ptr) == QRISK_OK);
        CHECK(merged_json.str() == db_json.str());

        qrisk_db_free(loaded_db);
        std::filesystem::remove(path);
    }

    SUBCASE("promotion validates its threshold") {
        CStr out;
        CHECK(qrisk_promote(report_json.c_str(), 0.0, db, &out.ptr) ==
              QRISK_INVALID_ARGUMENT);
        CHECK(qrisk_promote(report_json.c_str(), 1.5, db, &out.ptr) ==
              QRISK_INVALID_ARGUMENT);
    }

    qrisk_db_free(db);
}

TEST_CASE("window calibration export is deterministic and drifts per window") {
    const std::string spec_json = qrisk::backend_spec_to_json_str(tiny_clean_spec());
    qrisk_backend* backend = nullptr;
    REQUIRE(qrisk_backend_from_json(spec_json.c_str(), &backend) == QRISK_OK);

    CStr backend_json;
    REQUIRE(qrisk_backend_to_json(backend, &backend_json.ptr) == QRISK_OK);
    CHECK(backend_json.str() == spec_json);

    qrisk_noise_model* w0 = nullptr;
    qrisk_noise_model* w0_again = nullptr;
    qrisk_noise_model* w1 = nullptr;
    REQUIRE(qrisk_backend_window_calibration(backend, 0, 42, &w0) == QRISK_OK);
    REQUIRE(qrisk_backend_window_calibration(backend, 0, 42, &w0_again) == QRISK_OK);
    REQUIRE(qrisk_backend_window_calibration(backend, 1, 42, &w1) == QRISK_OK);

    CStr j0, j0_again, j1;
    REQUIRE(qrisk_noise_model_to_json(w0, &j0.ptr) == QRISK_OK);
    REQUIRE(qrisk_noise_model_to_json(w0_again, &j0_again.ptr) == QRISK_OK);
    REQUIRE(qrisk_noise_model_to_json(w1, &j1.ptr) == QRISK_OK);
    CHECK(j0.str() == j0_again.str());
    CHECK(j0.str() != j1.str()); // different window, different drift draw

    // The exported snapshot round-trips through the model JSON entry point.
    qrisk_noise_model* reparsed = nullptr;
    REQUIRE(qrisk_noise_model_from_json(j0.ptr, &reparsed) == QRISK_OK);
    CStr reparsed_json;
    REQUIRE(qrisk_noise_model_to_json(reparsed, &reparsed_json.ptr) == QRISK_OK);
    CHECK(reparsed_json.str() == j0.str());

    qrisk_noise_model_free(reparsed);
    qrisk_noise_model_free(w1);
    qrisk_noise_model_free(w0_again);
    qrisk_noise_model_free(w0);
    qrisk_backend_free(backend);
}

TEST_CASE("discovery over the boundary is deterministic and finds no excess on a clean backend") {
    const std::string spec_json = qrisk::backend_spec_to_json_str(tiny_clean_spec());
    qrisk_backend* backend = nullptr;
    REQUIRE(qrisk_backend_from_json(spec_json.c_str(), &backend) == QRISK_OK);

    const std::string circuit_json = qrisk::circuit_to_json_str(two_segment_circuit());
    qrisk_circuit* c = nullptr;
    REQUIRE(qrisk_circuit_from_json(circuit_json.c_str(), &c) == QRISK_OK);

    const char* options = R"({"shots": 512, "null_runs": 3, "sigma_multiplier": 6.0})";

    CStr first, second;
    REQUIRE(qrisk_discover(c, backend, 0, options, 7, &first.ptr) == QRISK_OK);
    REQUIRE(qrisk_discover(c, backend, 0, options, 7, &second.ptr) == QRISK_OK);
    CHECK(first.str() == second.str());

    const auto j = json::parse(first.str());
    CHECK(j.at("status").get<std::string>() == "no_excess");
    CHECK(j.at("flagged_segments").empty());
    CHECK(j.at("oracle_calls").get<uint64_t>() >= 1);
    CHECK(j.at("calibration").at("tau").get<double>() >= 0.0);

    // Malformed options are rejected, not silently defaulted.
    CStr out;
    CHECK(qrisk_discover(c, backend, 0, "[]", 7, &out.ptr) == QRISK_INVALID_ARGUMENT);
    CHECK(qrisk_discover(c, backend, 0, "{bad", 7, &out.ptr) == QRISK_PARSE_ERROR);

    qrisk_circuit_free(c);
    qrisk_backend_free(backend);
}

TEST_CASE("disrupt with an empty db returns the circuit unchanged") {
    const std::string circuit_json = qrisk::circuit_to_json_str(two_segment_circuit());
    qrisk_circuit* c = nullptr;
    REQUIRE(qrisk_circuit_from_json(circuit_json.c_str(), &c) == QRISK_OK);
    qrisk_db* db = nullptr;
    REQUIRE(qrisk_db_create(&db) == QRISK_OK);

    qrisk_circuit* rewritten = nullptr;
    CStr report;
    REQUIRE(qrisk_disrupt(c, db, UINT32_MAX, &rewritten, &report.ptr) == QRISK_OK);
    REQUIRE(rewritten != nullptr);

    CStr rewritten_json;
    REQUIRE(qrisk_circuit_to_json(rewritten, &rewritten_json.ptr) == QRISK_OK);
    CHECK(rewritten_json.str() == circuit_json);

    const auto j = json::parse(report.str());
    CHECK(j.at("initial_occurrences").get<uint32_t>() == 0);
    CHECK(j.at("disrupted").get<uint32_t>() == 0);
    CHECK(j.at("swaps_applied").get<uint32_t>() == 0);
    // The report embeds the rewritten circuit, not an emptied-out husk.
    CHECK(j.at("circuit").at("ops").size() == two_segment_circuit().ops.size());

    qrisk_circuit_free(rewritten);
    qrisk_db_free(db);
    qrisk_circuit_free(c);
}

TEST_SUITE_END();
