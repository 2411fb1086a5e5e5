#include <doctest.h>

#include "circuit.hpp"
#include "match.hpp"

using namespace qrisk;

namespace {

GateTemplate sx_sx_cz() {
    GateTemplate t;
    t.steps = {{GateKind::Sx, {0}}, {GateKind::Sx, {0}}, {GateKind::Cz, {0, 1}}};
    return t;
}

Circuit base(uint32_t n = 3) {
    Circuit c;
    c.backend_id = "dev";
    c.num_physical_qubits = n;
    return c;
}

} // namespace

TEST_CASE("template occurrence requires timeline contiguity") {
    Circuit c = base();
    c.ops = {{GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}, {GateKind::Cz, 0.0, {0, 1}}};
    auto occs = find_occurrences(c, sx_sx_cz(), {0, 1});
    REQUIRE(occs.size() == 1);
    CHECK(occs[0] == std::vector<uint32_t>{0, 1, 2});

    SUBCASE("an intervening op on an involved qubit breaks the match") {
        c.ops.insert(c.ops.begin() + 1, {GateKind::Rz, 0.3, {0}});
        CHECK(find_occurrences(c, sx_sx_cz(), {0, 1}).empty());
    }
    SUBCASE("an intervening op on a disjoint qubit does not") {
        c.ops.insert(c.ops.begin() + 1, {GateKind::Rz, 0.3, {2}});
        auto interleaved = find_occurrences(c, sx_sx_cz(), {0, 1});
        REQUIRE(interleaved.size() == 1);
        CHECK(interleaved[0] == std::vector<uint32_t>{0, 2, 3});
    }
    SUBCASE("an op on the partner qubit between the pair and the cz breaks it") {
        c.ops.insert(c.ops.begin() + 2, {GateKind::X, 0.0, {1}});
        CHECK(find_occurrences(c, sx_sx_cz(), {0, 1}).empty());
    }
}

TEST_CASE("cz steps match either qubit order") {
    Circuit c = base();
    c.ops = {{GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}, {GateKind::Cz, 0.0, {1, 0}}};
    CHECK(find_occurrences(c, sx_sx_cz(), {0, 1}).size() == 1);
}

TEST_CASE("binding is literal: other qubits do not match") {
    Circuit c = base();
    c.ops = {{GateKind::Sx, 0.0, {2}}, {GateKind::Sx, 0.0, {2}}, {GateKind::Cz, 0.0, {2, 1}}};
    CHECK(find_occurrences(c, sx_sx_cz(), {0, 1}).empty());
    CHECK(find_occurrences(c, sx_sx_cz(), {2, 1}).size() == 1);
}

TEST_CASE("overlapping occurrences are all reported") {
    GateTemplate pair;
    pair.steps = {{GateKind::Sx, {0}}, {GateKind::Sx, {0}}};
    Circuit c = base(1);
    c.ops = {{GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}};
    auto occs = find_occurrences(c, pair, {0});
    REQUIRE(occs.size() == 2);
    CHECK(occs[0] == std::vector<uint32_t>{0, 1});
    CHECK(occs[1] == std::vector<uint32_t>{1, 2});
}

TEST_CASE("angles are ignored by matching") {
    GateTemplate t;
    t.steps = {{GateKind::Rz, {0}}, {GateKind::Cz, {0, 1}}};
    Circuit c = base();
    c.ops = {{GateKind::Rz, 1.234, {0}}, {GateKind::Cz, 0.0, {0, 1}}};
    CHECK(find_occurrences(c, t, {0, 1}).size() == 1);
}

TEST_CASE("multiple disjoint occurrences in one circuit") {
    Circuit c = base(2);
    c.ops = {{GateKind::Sx, 0.0, {0}}, {GateKind::Sx, 0.0, {0}}, {GateKind::Cz, 0.0, {0, 1}},
             {GateKind::X, 0.0, {0}},  {GateKind::X, 0.0, {1}},  {GateKind::Sx, 0.0, {0}},
             {GateKind::Sx, 0.0, {0}}, {GateKind::Cz, 0.0, {0, 1}}};
    auto occs = find_occurrences(c, sx_sx_cz(), {0, 1});
    REQUIRE(occs.size() == 2);
    CHECK(occs[0] == std::vector<uint32_t>{0, 1, 2});
    CHECK(occs[1] == std::vector<uint32_t>{5, 6, 7});
}
