// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <string>
#include <vector>

#include "prashna/cfg.hpp"
#include "prashna/isa.hpp"
#include "support/testutil.hpp"

using namespace prashna;
using namespace prashna::testsupport;
using prashna::testsupport::fixture_path;
using prashna::testsupport::slurp;

namespace {

Cfg cfg_of(const std::string& text) {
    return build_cfg(parse_text_program(text).instructions);
}

const char* kDiamond =
    "jeq r1, 0, 2\n"
    "mov r0, 1\n"
    "exit\n"
    "mov r0, 2\n"
    "exit\n";

const char* kThreeDiamonds =
    "jge r1, 1, 1\n"
    "mov r2, 1\n"
    "jge r1, 2, 1\n"
    "mov r2, 2\n"
    "jge r1, 3, 1\n"
    "mov r2, 3\n"
    "mov r0, 2\n"
    "exit\n";

} // namespace

TEST_CASE("straight-line programs form a single block") {
    Cfg cfg = cfg_of("mov r0, 2\nmov r1, 3\nexit\n");
    REQUIRE(cfg.blocks.size() == 1);
    CHECK(cfg.blocks[0].id == "node_0");
    CHECK(cfg.blocks[0].first == 0);
    CHECK(cfg.blocks[0].last == 2);
    CHECK(cfg.blocks[0].successors.empty());
    CHECK(cfg.entry == "node_0");
    CHECK(cfg.exits == std::vector<std::string>{"node_0"});
}

TEST_CASE("conditional jumps split blocks with the taken edge first") {
    Cfg cfg = cfg_of(kDiamond);
    REQUIRE(cfg.blocks.size() == 3);
    CHECK(cfg.blocks[0].first == 0);
    CHECK(cfg.blocks[0].last == 0);
    CHECK(cfg.blocks[1].first == 1);
    CHECK(cfg.blocks[1].last == 2);
    CHECK(cfg.blocks[2].first == 3);
    CHECK(cfg.blocks[2].last == 4);
    CHECK(cfg.blocks[0].successors == std::vector<std::string>{"node_2", "node_1"});
    CHECK(cfg.exits == std::vector<std::string>{"node_1", "node_2"});
    CHECK(count_paths(cfg) == 2);
}

TEST_CASE("a conditional whose target is its fallthrough keeps one edge") {
    Cfg cfg = cfg_of("jeq r1, 0, 0\nexit\n");
    REQUIRE(cfg.blocks.size() == 2);
    CHECK(cfg.blocks[0].successors == std::vector<std::string>{"node_1"});
    CHECK(count_paths(cfg) == 1);
}

TEST_CASE("unconditional jumps carry a single successor") {
    Cfg cfg = cfg_of("jmp 1\nexit\nmov r0, 2\nexit\n");
    REQUIRE(cfg.blocks.size() == 3);
    CHECK(cfg.blocks[0].successors == std::vector<std::string>{"node_2"});
    CHECK(cfg.blocks[1].successors.empty());
    // node_1 is unreachable yet still a block
    CHECK(cfg.blocks[1].first == 1);
}

TEST_CASE("wide loads keep slot indexing consistent") {
    Cfg cfg = cfg_of("ldmapfd r1, map=m\ncall 1\njeq r0, 0, 1\nexit\nexit\n");
    // slots: 0-1 wide, 2 call, 3 jeq, 4 exit, 5 exit
    REQUIRE(cfg.blocks.size() == 3);
    CHECK(cfg.blocks[0].first == 0);
    CHECK(cfg.blocks[0].last == 2); // positions, not slots
    CHECK(cfg.blocks[0].successors == std::vector<std::string>{"node_2", "node_1"});
}

TEST_CASE("malformed control flow is rejected") {
    CHECK_FAILS(build_cfg({}), errc::jump_out_of_range);
    CHECK_FAILS(cfg_of("mov r0, 2\n"), errc::jump_out_of_range); // runs off the end
    CHECK_FAILS(cfg_of("jmp 5\nexit\n"), errc::jump_out_of_range);
    CHECK_FAILS(cfg_of("jmp -2\nexit\n"), errc::jump_out_of_range);
    CHECK_FAILS(cfg_of("jeq r1, 0, 3\nexit\n"), errc::jump_out_of_range);
    // target lands in the middle of a wide load
    CHECK_FAILS(cfg_of("jeq r1, 0, 1\nldmapfd r1, map=m\nexit\n"), errc::jump_out_of_range);
    // last instruction is a conditional jump: its fallthrough runs off
    CHECK_FAILS(cfg_of("jeq r1, 0, -1\n"), errc::jump_out_of_range);
}

TEST_CASE("backward edges are loops") {
    CHECK_FAILS(cfg_of("jmp -1\nexit\n"), errc::cycle_detected);
    CHECK_FAILS(cfg_of("mov r1, 0\njeq r1, 0, -2\nexit\n"), errc::cycle_detected);
}

TEST_CASE("block lookup by id") {
    Cfg cfg = cfg_of(kDiamond);
    CHECK(cfg.index_of("node_1") == 1);
    CHECK(cfg.block("node_2").first == 3);
    CHECK_FAILS(cfg.index_of("node_9"), errc::jump_out_of_range);
}

TEST_CASE("path enumeration follows the taken edge first") {
    Cfg cfg = cfg_of(kThreeDiamonds);
    CHECK(count_paths(cfg) == 8);
    PathStream stream(cfg, 100);
    auto first = stream.next();
    REQUIRE(first.has_value());
    CHECK(*first == std::vector<std::string>{"node_0", "node_2", "node_4", "node_6"});
    auto second = stream.next();
    REQUIRE(second.has_value());
    CHECK(*second == std::vector<std::string>{"node_0", "node_2", "node_4", "node_5", "node_6"});

    size_t rest = 0;
    while (stream.next().has_value())
        ++rest;
    CHECK(rest == 6);
    CHECK_FALSE(stream.next().has_value()); // stays exhausted
}

TEST_CASE("every enumerated path starts at entry and ends at an exit") {
    Cfg cfg = cfg_of(kThreeDiamonds);
    PathStream stream(cfg, 100);
    size_t n = 0;
    while (auto path = stream.next()) {
        ++n;
        REQUIRE_FALSE(path->empty());
        CHECK(path->front() == cfg.entry);
        CHECK(path->back() == "node_6");
    }
    CHECK(n == count_paths(cfg));
}

TEST_CASE("the path budget caps enumeration") {
    Cfg cfg = cfg_of(kThreeDiamonds);
    PathStream stream(cfg, 3);
    CHECK(stream.next().has_value());
    CHECK(stream.next().has_value());
    CHECK(stream.next().has_value());
    CHECK_FAILS(stream.next(), errc::path_budget_exceeded);

    // a budget equal to the path count is enough
    PathStream exact(cfg, 8);
    size_t n = 0;
    while (exact.next().has_value())
        ++n;
    CHECK(n == 8);
}

TEST_CASE("the default budget honours the environment") {
    unsetenv("PRASHNA_PATH_BUDGET");
    CHECK(default_path_budget() == 1000000);
    setenv("PRASHNA_PATH_BUDGET", "7", 1);
    CHECK(default_path_budget() == 7);
    setenv("PRASHNA_PATH_BUDGET", "abc", 1);
    CHECK(default_path_budget() == 1000000);
    setenv("PRASHNA_PATH_BUDGET", "0", 1);
    CHECK(default_path_budget() == 1000000);
    unsetenv("PRASHNA_PATH_BUDGET");
}

TEST_CASE("path counting saturates on the deep fixture") {
    Cfg cfg = cfg_of(slurp(fixture_path("deep_paths.asm")));
    CHECK(count_paths(cfg) == 1024);
}

TEST_CASE("dot rendering lists blocks and edges") {
    std::string dot = to_dot(cfg_of(kDiamond));
    CHECK(dot.rfind("digraph cfg {", 0) == 0);
    CHECK(dot.find("node_0 -> node_2;") != std::string::npos);
    CHECK(dot.find("node_0 -> node_1;") != std::string::npos);
    CHECK(dot.find("node_2 [label=\"node_2 [3..4]\"]") != std::string::npos);
    CHECK(dot.back() == '\n');
}
