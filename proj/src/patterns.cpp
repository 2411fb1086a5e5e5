#include "patterns.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "parallel.hpp"

namespace qrisk {

// JSON serializers defined in circuit.cpp.
void to_json(nlohmann::json& j, const Operation& op);
void from_json(const nlohmann::json& j, Operation& op);
void to_json(nlohmann::json& j, const Circuit& circuit);
void from_json(const nlohmann::json& j, Circuit& circuit);

namespace {

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<uint64_t> sorted_union(const std::vector<uint64_t>& a,
                                   const std::vector<uint64_t>& b) {
    std::vector<uint64_t> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void normalize_uids(PatternEntry& e) {
    auto tidy = [](std::vector<uint64_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    tidy(e.flagged_window_uids);
    tidy(e.examined_window_uids);
    e.windows_flagged = uint32_t(e.flagged_window_uids.size());
    e.windows_total = uint32_t(e.examined_window_uids.size());
}

/// A segment's concrete gate ops as an angle-free template over roles in
/// first-appearance order. False when fewer than two gate ops remain.
bool extract_template(const Circuit& circuit, const Segment& seg, GateTemplate& tmpl,
                      std::vector<uint32_t>& tuple) {
    tmpl.steps.clear();
    tuple.clear();
    std::map<uint32_t, uint32_t> role_of;
    for (uint32_t id : seg.op_ids) {
        const Operation& op = circuit.ops[id];
        if (op.kind == GateKind::Measure) continue;
        TemplateStep step;
        step.kind = op.kind;
        for (uint32_t q : op.qubits) {
            auto [it, fresh] = role_of.try_emplace(q, uint32_t(tuple.size()));
            if (fresh) tuple.push_back(q);
            step.roles.push_back(it->second);
        }
        tmpl.steps.push_back(std::move(step));
    }
    return tmpl.steps.size() >= 2;
}

void validate_entry(const PatternEntry& e) {
    if (e.backend_id.empty()) raise(ErrorCode::ParseError, "pattern entry without backend_id");
    if (e.tmpl.steps.size() < 2)
        raise(ErrorCode::ParseError, "pattern template needs at least 2 steps");
    if (e.windows_flagged > e.windows_total)
        raise(ErrorCode::ParseError, "pattern entry flagged in more windows than it was examined");
    for (const auto& step : e.tmpl.steps)
        for (uint32_t role : step.roles)
            if (role >= e.qubit_tuple.size())
                raise(ErrorCode::ParseError, "pattern template role outside its qubit tuple");
}

} // namespace

uint32_t PersistenceReport::flag_count(uint32_t segment) const {
    uint32_t n = 0;
    for (const auto& w : windows)
        n += uint32_t(std::count(w.flagged_segments.begin(), w.flagged_segments.end(), segment));
    return n;
}

std::vector<uint64_t> PersistenceReport::flagged_uids(uint32_t segment) const {
    std::vector<uint64_t> uids;
    for (const auto& w : windows)
        if (std::count(w.flagged_segments.begin(), w.flagged_segments.end(), segment))
            uids.push_back(w.window_uid);
    return uids;
}

PersistenceReport verify(const Circuit& circuit, const BackendSpec& spec, uint32_t n_windows,
                         const DiscoveryOptions& options, uint64_t master_seed) {
    if (n_windows < 2)
        raise(ErrorCode::InvalidArgument, "persistence needs at least 2 windows");
    validate(circuit);
    validate(spec);

    PersistenceReport report;
    report.backend_id = spec.backend_id;
    report.master_seed = master_seed;
    report.circuit = circuit;
    report.segments = group_segments(partition_into_moments(circuit), options.segment_size);

    report.windows.resize(n_windows);
    parallel_for(n_windows, [&](size_t w) {
        const CalibrationWindow window = open_window(spec, uint32_t(w), master_seed);
        const Executor hw = [&window](const Circuit& c, uint32_t shots, uint64_t seed) {
            return execute_on_window(c, window, shots, seed);
        };
        const DiscoveryResult r =
            discover(circuit, export_calibration(window), hw, options, window.seed);

        WindowOutcome outcome;
        outcome.window_index = uint32_t(w);
        outcome.window_uid = window.seed;
        outcome.status = r.status;
        outcome.flagged_segments.assign(r.flagged_segments.begin(), r.flagged_segments.end());
        outcome.baseline_R = r.baseline_R;
        outcome.tau = r.calibration.tau;
        outcome.tvd_min = r.calibration.tvd_min;
        outcome.oracle_calls = r.oracle_calls;
        report.windows[w] = std::move(outcome);
    });
    return report;
}

std::vector<PatternEntry> promote(const PersistenceReport& report, double min_consistency,
                                  std::vector<uint32_t>* skipped_segments) {
    if (!(min_consistency > 0.0 && min_consistency <= 1.0))
        raise(ErrorCode::InvalidArgument, "min_consistency must be in (0, 1]");
    const uint32_t total = uint32_t(report.windows.size());
    if (total == 0) return {};

    std::vector<uint64_t> examined;
    for (const auto& w : report.windows) examined.push_back(w.window_uid);
    std::sort(examined.begin(), examined.end());

    std::vector<PatternEntry> promoted;
    const std::string stamp = now_iso8601();
    for (const auto& seg : report.segments) {
        const uint32_t flagged = report.flag_count(seg.index);
        // One-off flags are transients by definition, never evidence.
        if (flagged < 2) continue;
        if (double(flagged) / double(total) < min_consistency) continue;

        PatternEntry e;
        if (!extract_template(report.circuit, seg, e.tmpl, e.qubit_tuple)) {
            if (skipped_segments) skipped_segments->push_back(seg.index);
            continue;
        }
        e.backend_id = report.backend_id;
        e.flagged_window_uids = report.flagged_uids(seg.index);
        e.examined_window_uids = examined;
        normalize_uids(e);
        std::ostringstream src;
        src << "segment " << seg.index << " (moments " << seg.moment_begin << ".."
            << seg.moment_end << ") of circuit " << std::hex << fingerprint(report.circuit);
        e.source = src.str();
        e.created = stamp;
        e.updated = stamp;
        promoted.push_back(std::move(e));
    }
    return promoted;
}

// --- DB serialization -------------------------------------------------------

static void to_json(nlohmann::json& j, const TemplateStep& step) {
    j = nlohmann::json{{"kind", gate_name(step.kind)}, {"roles", step.roles}};
}

static void from_json(const nlohmann::json& j, TemplateStep& step) {
    step.kind = gate_from_name(j.at("kind").get<std::string>());
    step.roles = j.at("roles").get<std::vector<uint32_t>>();
}

static void to_json(nlohmann::json& j, const PatternEntry& e) {
    const nlohmann::json meta{{"created", e.created}, {"updated", e.updated}};
    j = nlohmann::json{{"backend_id", e.backend_id},
                       {"qubit_tuple", e.qubit_tuple},
                       {"template", e.tmpl.steps},
                       {"windows_flagged", e.windows_flagged},
                       {"windows_total", e.windows_total},
                       {"flagged_window_uids", e.flagged_window_uids},
                       {"examined_window_uids", e.examined_window_uids},
                       {"source", e.source},
                       {"meta", meta}};
}

static void from_json(const nlohmann::json& j, PatternEntry& e) {
    e.backend_id = j.at("backend_id").get<std::string>();
    e.qubit_tuple = j.at("qubit_tuple").get<std::vector<uint32_t>>();
    e.tmpl.steps = j.at("template").get<std::vector<TemplateStep>>();
    e.windows_flagged = j.at("windows_flagged").get<uint32_t>();
    e.windows_total = j.at("windows_total").get<uint32_t>();
    e.flagged_window_uids = j.value("flagged_window_uids", std::vector<uint64_t>{});
    e.examined_window_uids = j.value("examined_window_uids", std::vector<uint64_t>{});
    e.source = j.value("source", std::string{});
    if (j.contains("meta")) {
        e.created = j.at("meta").value("created", std::string{});
        e.updated = j.at("meta").value("updated", std::string{});
    }
}

std::string db_to_json_str(const PatternDB& db, int indent) {
    nlohmann::json j{{"format_version", PatternDB::kFormatVersion}, {"entries", db.entries}};
    return j.dump(indent);
}

PatternDB db_from_json_str(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("pattern db: ") + e.what());
    }
    PatternDB db;
    try {
        const uint32_t version = j.at("format_version").get<uint32_t>();
        if (version != PatternDB::kFormatVersion)
            raise(ErrorCode::VersionMismatch,
                  "pattern db format " + std::to_string(version) + " needs migration (expected " +
                      std::to_string(PatternDB::kFormatVersion) + ")");
        db.entries = j.at("entries").get<std::vector<PatternEntry>>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("pattern db: ") + e.what());
    }
    for (size_t i = 0; i < db.entries.size(); ++i) {
        validate_entry(db.entries[i]);
        for (size_t k = 0; k < i; ++k)
            if (db.entries[i].same_key(db.entries[k]))
                raise(ErrorCode::ParseError, "pattern db has duplicate entry keys");
    }
    return db;
}

PatternDB db_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open pattern db: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return db_from_json_str(buf.str());
}

void db_save(const PatternDB& db, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot write pattern db: " + tmp);
        out << db_to_json_str(db) << '\n';
        if (!out.flush()) raise(ErrorCode::IoError, "failed writing pattern db: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        raise(ErrorCode::IoError, "failed moving pattern db into place: " + path);
    }
}

void db_add(PatternDB& db, const std::vector<PatternEntry>& entries) {
    for (const auto& incoming : entries) {
        auto it = std::find_if(db.entries.begin(), db.entries.end(),
                               [&incoming](const PatternEntry& e) { return e.same_key(incoming); });
        if (it == db.entries.end()) {
            db.entries.push_back(incoming);
            normalize_uids(db.entries.back());
            continue;
        }
        it->flagged_window_uids = sorted_union(it->flagged_window_uids, incoming.flagged_window_uids);
        it->examined_window_uids =
            sorted_union(it->examined_window_uids, incoming.examined_window_uids);
        normalize_uids(*it);
        if (!incoming.created.empty() && (it->created.empty() || incoming.created < it->created))
            it->created = incoming.created;
        if (incoming.updated > it->updated) it->updated = incoming.updated;
    }
}

PatternDB db_merge(const PatternDB& a, const PatternDB& b) {
    PatternDB out = a;
    db_add(out, b.entries);
    return out;
}

std::vector<PatternOccurrence> scan(const Circuit& circuit, const PatternDB& db) {
    validate(circuit);
    std::vector<PatternOccurrence> out;
    for (size_t i = 0; i < db.entries.size(); ++i) {
        const PatternEntry& e = db.entries[i];
        if (e.backend_id != circuit.backend_id) continue; // patterns never transfer
        for (auto& ids : find_occurrences(circuit, e.tmpl, e.qubit_tuple))
            out.push_back({i, std::move(ids)});
    }
    return out;
}

// --- Persistence report serialization ---------------------------------------

std::string occurrences_to_json_str(const std::vector<PatternOccurrence>& occurrences,
                                    int indent) {
    nlohmann::json occs = nlohmann::json::array();
    for (const auto& o : occurrences) {
        occs.push_back({{"entry_index", o.entry_index}, {"op_ids", o.op_ids}});
    }
    nlohmann::json j{{"count", occurrences.size()}, {"occurrences", occs}};
    return j.dump(indent);
}

std::string persistence_report_to_json_str(const PersistenceReport& report, int indent) {
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& seg : report.segments) {
        segments.push_back({{"index", seg.index},
                            {"moment_begin", seg.moment_begin},
                            {"moment_end", seg.moment_end},
                            {"op_ids", seg.op_ids}});
    }
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : report.windows) {
        windows.push_back({{"window_index", w.window_index},
                           {"window_uid", w.window_uid},
                           {"status", discovery_status_name(w.status)},
                           {"flagged_segments", w.flagged_segments},
                           {"baseline_R", w.baseline_R},
                           {"tau", w.tau},
                           {"tvd_min", w.tvd_min},
                           {"oracle_calls", w.oracle_calls}});
    }
    nlohmann::json tally = nlohmann::json::array();
    for (const auto& seg : report.segments) {
        const uint32_t flagged = report.flag_count(seg.index);
        tally.push_back({{"segment", seg.index},
                         {"flagged", flagged},
                         {"total", report.windows.size()},
                         {"consistency", report.windows.empty()
                                             ? 0.0
                                             : double(flagged) / double(report.windows.size())}});
    }
    nlohmann::json j{{"backend_id", report.backend_id},
                     {"master_seed", report.master_seed},
                     {"circuit", report.circuit},
                     {"segments", segments},
                     {"windows", windows},
                     {"tally", tally}};
    return j.dump(indent);
}

PersistenceReport persistence_report_from_json_str(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("persistence report: ") + e.what());
    }
    PersistenceReport report;
    try {
        report.backend_id = j.at("backend_id").get<std::string>();
        report.master_seed = j.at("master_seed").get<uint64_t>();
        from_json(j.at("circuit"), report.circuit);
        for (const auto& js : j.at("segments")) {
            Segment seg;
            seg.index = js.at("index").get<uint32_t>();
            seg.moment_begin = js.at("moment_begin").get<uint32_t>();
            seg.moment_end = js.at("moment_end").get<uint32_t>();
            seg.op_ids = js.at("op_ids").get<std::vector<uint32_t>>();
            report.segments.push_back(std::move(seg));
        }
        for (const auto& jw : j.at("windows")) {
            WindowOutcome w;
            w.window_index = jw.at("window_index").get<uint32_t>();
            w.window_uid = jw.at("window_uid").get<uint64_t>();
            const std::string status = jw.at("status").get<std::string>();
            if (status == "found") w.status = DiscoveryStatus::Found;
            else if (status == "no_excess") w.status = DiscoveryStatus::NoExcess;
            else if (status == "exhausted") w.status = DiscoveryStatus::Exhausted;
            else raise(ErrorCode::ParseError, "unknown window status: " + status);
            w.flagged_segments = jw.at("flagged_segments").get<std::vector<uint32_t>>();
            w.baseline_R = jw.at("baseline_R").get<double>();
            w.tau = jw.at("tau").get<double>();
            w.tvd_min = jw.at("tvd_min").get<double>();
            w.oracle_calls = jw.at("oracle_calls").get<uint64_t>();
            report.windows.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("persistence report: ") + e.what());
    }
    return report;
}

std::string persistence_report_to_csv(const PersistenceReport& report) {
    std::ostringstream out;
    out << "segment";
    for (const auto& w : report.windows) out << ",window_" << w.window_index;
    out << ",flagged,total,consistency\n";
    for (const auto& seg : report.segments) {
        out << seg.index;
        uint32_t flagged = 0;
        for (const auto& w : report.windows) {
            const bool hit = std::count(w.flagged_segments.begin(), w.flagged_segments.end(),
                                        seg.index) > 0;
            flagged += hit ? 1 : 0;
            out << ',' << (hit ? 1 : 0);
        }
        out << ',' << flagged << ',' << report.windows.size() << ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f",
                      report.windows.empty() ? 0.0
                                             : double(flagged) / double(report.windows.size()));
        out << buf << '\n';
    }
    return out.str();
}

} // namespace qrisk
