#include "circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace qrisk {

const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::Rz: return "rz";
        case GateKind::Sx: return "sx";
        case GateKind::X: return "x";
        case GateKind::Cz: return "cz";
        case GateKind::Measure: return "measure";
    }
    raise(ErrorCode::Internal, "unknown gate kind");
}

GateKind gate_from_name(const std::string& name) {
    if (name == "rz") return GateKind::Rz;
    if (name == "sx") return GateKind::Sx;
    if (name == "x") return GateKind::X;
    if (name == "cz") return GateKind::Cz;
    if (name == "measure") return GateKind::Measure;
    raise(ErrorCode::UnsupportedGate, "unsupported gate '" + name + "'");
}

std::set<uint32_t> Circuit::used_qubits() const {
    std::set<uint32_t> used;
    for (const auto& op : ops)
        for (uint32_t q : op.qubits) used.insert(q);
    return used;
}

std::vector<uint32_t> Circuit::measured_qubits() const {
    std::vector<uint32_t> measured;
    for (const auto& op : ops)
        if (op.kind == GateKind::Measure) measured.push_back(op.qubits[0]);
    return measured;
}

void validate(const Circuit& circuit) {
    std::vector<bool> measured(circuit.num_physical_qubits, false);
    for (size_t i = 0; i < circuit.ops.size(); ++i) {
        const auto& op = circuit.ops[i];
        const std::string where = "op " + std::to_string(i);
        size_t arity = op.kind == GateKind::Cz ? 2 : 1;
        if (op.qubits.size() != arity)
            raise(ErrorCode::InvalidArgument,
                  where + ": " + gate_name(op.kind) + " expects " + std::to_string(arity) +
                      " qubit(s), got " + std::to_string(op.qubits.size()));
        if (op.kind == GateKind::Cz && op.qubits[0] == op.qubits[1])
            raise(ErrorCode::InvalidArgument, where + ": cz qubits must be distinct");
        if (op.kind != GateKind::Rz && op.angle != 0.0)
            raise(ErrorCode::InvalidArgument,
                  where + ": only rz carries an angle");
        for (uint32_t q : op.qubits) {
            if (q >= circuit.num_physical_qubits)
                raise(ErrorCode::InvalidArgument,
                      where + ": qubit q" + std::to_string(q) + " out of range (backend has " +
                          std::to_string(circuit.num_physical_qubits) + ")");
            if (measured[q])
                raise(ErrorCode::InvalidArgument,
                      where + ": qubit q" + std::to_string(q) + " already measured");
        }
        if (op.kind == GateKind::Measure) measured[op.qubits[0]] = true;
    }
}

std::vector<std::vector<uint32_t>> partition_into_moments(const Circuit& circuit) {
    std::map<uint32_t, uint32_t> next_free;
    std::vector<std::vector<uint32_t>> moments;
    for (uint32_t id = 0; id < circuit.ops.size(); ++id) {
        uint32_t slot = 0;
        for (uint32_t q : circuit.ops[id].qubits) {
            auto it = next_free.find(q);
            if (it != next_free.end()) slot = std::max(slot, it->second);
        }
        if (slot >= moments.size()) moments.resize(slot + 1);
        moments[slot].push_back(id);
        for (uint32_t q : circuit.ops[id].qubits) next_free[q] = slot + 1;
    }
    return moments;
}

std::vector<Segment> group_segments(const std::vector<std::vector<uint32_t>>& moments,
                                    uint32_t segment_size) {
    if (segment_size == 0)
        raise(ErrorCode::InvalidArgument, "segment size must be positive");
    std::vector<Segment> segments;
    for (uint32_t begin = 0; begin < moments.size(); begin += segment_size) {
        Segment seg;
        seg.index = uint32_t(segments.size());
        seg.moment_begin = begin;
        seg.moment_end = std::min<uint32_t>(begin + segment_size, uint32_t(moments.size()));
        for (uint32_t m = seg.moment_begin; m < seg.moment_end; ++m)
            seg.op_ids.insert(seg.op_ids.end(), moments[m].begin(), moments[m].end());
        std::sort(seg.op_ids.begin(), seg.op_ids.end());
        segments.push_back(std::move(seg));
    }
    return segments;
}

Circuit remove_segments(const Circuit& circuit, const std::vector<Segment>& segments,
                        const std::set<uint32_t>& keep) {
    for (uint32_t index : keep)
        if (index >= segments.size())
            raise(ErrorCode::InvalidArgument,
                  "kept segment " + std::to_string(index) + " out of range");
    std::vector<bool> keep_op(circuit.ops.size(), false);
    for (const auto& seg : segments) {
        bool kept = keep.count(seg.index) > 0;
        for (uint32_t id : seg.op_ids)
            keep_op[id] = kept || circuit.ops[id].kind == GateKind::Measure;
    }
    Circuit reduced;
    reduced.backend_id = circuit.backend_id;
    reduced.num_physical_qubits = circuit.num_physical_qubits;
    for (uint32_t id = 0; id < circuit.ops.size(); ++id)
        if (keep_op[id]) reduced.ops.push_back(circuit.ops[id]);
    return reduced;
}

std::vector<std::vector<uint32_t>> qubit_timelines(const Circuit& circuit) {
    std::vector<std::vector<uint32_t>> timelines(circuit.num_physical_qubits);
    for (uint32_t id = 0; id < circuit.ops.size(); ++id)
        for (uint32_t q : circuit.ops[id].qubits) timelines[q].push_back(id);
    return timelines;
}

uint64_t fingerprint(const Circuit& circuit) {
    uint64_t h = 0x51ab7c3e02f4d9a1ull;
    auto mix = [&h](uint64_t w) {
        h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
    };
    mix(hash_str(circuit.backend_id));
    mix(circuit.num_physical_qubits);
    for (const auto& op : circuit.ops) {
        mix(uint64_t(op.kind));
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(op.angle));
        std::memcpy(&bits, &op.angle, sizeof(bits));
        mix(bits);
        for (uint32_t q : op.qubits) mix(q);
    }
    return h;
}

namespace {

struct LineLexer {
    const std::string& text;
    size_t pos = 0;
    size_t line = 1;

    explicit LineLexer(const std::string& t) : text(t) {}

    void skip_space() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '\n') {
                ++line;
                ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    bool done() {
        skip_space();
        return pos >= text.size();
    }

    [[noreturn]] void fail(const std::string& message) {
        raise(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message);
    }

    std::string ident() {
        skip_space();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected identifier");
        return text.substr(start, pos - start);
    }

    void expect(char c) {
        skip_space();
        if (pos >= text.size() || text[pos] != c)
            fail(std::string("expected '") + c + "'");
        ++pos;
    }

    bool accept(char c) {
        skip_space();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    double number() {
        skip_space();
        size_t consumed = 0;
        double value = 0.0;
        try {
            value = std::stod(text.substr(pos), &consumed);
        } catch (const std::exception&) {
            fail("expected number");
        }
        pos += consumed;
        return value;
    }

    uint32_t qubit() {
        skip_space();
        if (pos >= text.size() || text[pos] != 'q') fail("expected qubit (q<index>)");
        ++pos;
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
            fail("expected qubit index after 'q'");
        uint64_t value = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            value = value * 10 + uint64_t(text[pos] - '0');
            if (value > 0xffffffffull) fail("qubit index too large");
            ++pos;
        }
        return uint32_t(value);
    }
};

} // namespace

Circuit parse_circuit_text(const std::string& text) {
    LineLexer lex(text);
    Circuit circuit;

    std::string key = lex.ident();
    if (key != "backend") lex.fail("circuit must start with 'backend: <id>;'");
    lex.expect(':');
    circuit.backend_id = lex.ident();
    lex.expect(';');
    key = lex.ident();
    if (key != "qubits") lex.fail("expected 'qubits: <n>;' after backend header");
    lex.expect(':');
    double n = lex.number();
    if (n < 1 || n != std::floor(n)) lex.fail("qubit count must be a positive integer");
    circuit.num_physical_qubits = uint32_t(n);
    lex.expect(';');

    while (!lex.done()) {
        Operation op;
        std::string name = lex.ident();
        op.kind = gate_from_name(name);
        if (lex.accept('(')) {
            if (op.kind != GateKind::Rz) lex.fail("only rz takes an angle");
            op.angle = lex.number();
            lex.expect(')');
        } else if (op.kind == GateKind::Rz) {
            lex.fail("rz requires an angle");
        }
        op.qubits.push_back(lex.qubit());
        while (lex.accept(',')) op.qubits.push_back(lex.qubit());
        lex.expect(';');
        circuit.ops.push_back(std::move(op));
    }
    validate(circuit);
    return circuit;
}

std::string circuit_to_text(const Circuit& circuit) {
    std::ostringstream out;
    out << "backend: " << circuit.backend_id << "; qubits: " << circuit.num_physical_qubits
        << ";\n";
    char buffer[64];
    for (const auto& op : circuit.ops) {
        out << gate_name(op.kind);
        if (op.kind == GateKind::Rz) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", op.angle);
            out << '(' << buffer << ')';
        }
        for (size_t i = 0; i < op.qubits.size(); ++i)
            out << (i == 0 ? " q" : ", q") << op.qubits[i];
        out << ";\n";
    }
    return out.str();
}

void to_json(nlohmann::json& j, const Operation& op) {
    j = nlohmann::json{{"kind", gate_name(op.kind)}, {"qubits", op.qubits}};
    if (op.kind == GateKind::Rz) j["angle"] = op.angle;
}

void from_json(const nlohmann::json& j, Operation& op) {
    op.kind = gate_from_name(j.at("kind").get<std::string>());
    op.qubits = j.at("qubits").get<std::vector<uint32_t>>();
    if (op.kind == GateKind::Rz)
        op.angle = j.at("angle").get<double>();
    else if (j.contains("angle"))
        raise(ErrorCode::ParseError, "only rz carries an angle");
}

void to_json(nlohmann::json& j, const Circuit& circuit) {
    j = nlohmann::json{{"backend_id", circuit.backend_id},
                       {"num_physical_qubits", circuit.num_physical_qubits},
                       {"ops", circuit.ops}};
}

void from_json(const nlohmann::json& j, Circuit& circuit) {
    circuit.backend_id = j.at("backend_id").get<std::string>();
    circuit.num_physical_qubits = j.at("num_physical_qubits").get<uint32_t>();
    circuit.ops = j.at("ops").get<std::vector<Operation>>();
}

Circuit circuit_from_json_str(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad circuit JSON: ") + e.what());
    }
    Circuit circuit;
    try {
        circuit = j.get<Circuit>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad circuit JSON: ") + e.what());
    }
    validate(circuit);
    return circuit;
}

std::string circuit_to_json_str(const Circuit& circuit, int indent) {
    nlohmann::json j = circuit;
    return j.dump(indent) + "\n";
}

} // namespace qrisk
