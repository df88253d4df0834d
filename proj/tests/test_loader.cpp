// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>
#include <string>
#include <vector>

#include "prashna/loader.hpp"
#include "support/elfgen.hpp"
#include "support/testutil.hpp"

using namespace prashna;
using namespace prashna::testsupport;

namespace {

const char* kBundleText =
    "mov r6, r1\n"
    "ldmapfd r1, map=flows\n"
    "mov r2, r10\n"
    "aluadd r2, -8\n"
    "call 1\n"
    "mov r0, 2\n"
    "exit\n";

// Encodes the text program and strips the pseudo-map marker from every wide
// load, leaving the unpatched form a compiler would emit into an object.
std::vector<uint8_t> unpatched_code(const std::string& text) {
    TextProgram prog = parse_text_program(text);
    std::vector<uint8_t> bytes = encode_program(prog.instructions);
    for (const auto& [slot, name] : prog.map_table)
        bytes[slot * kSlotBytes + 1] &= 0x0f;
    return bytes;
}

} // namespace

TEST_CASE("bundles default to the file stem and the xdp hook") {
    TempDir tmp;
    std::string path = tmp.file("flow_gate.asm", kBundleText);
    NfObject nf = load_bundle(path, std::nullopt);
    CHECK(nf.nf_id == "flow_gate");
    CHECK(nf.hook == "xdp");
    CHECK(nf.instructions.size() == 7);
    REQUIRE(nf.map_table.count(1) == 1);
    CHECK(nf.map_table.at(1) == "flows");
}

TEST_CASE("bundle options override name and hook") {
    TempDir tmp;
    std::string path = tmp.file("x.asm", "mov r0, 0\nexit\n");
    BundleOptions opts;
    opts.name = "NF1";
    opts.hook = "tc";
    NfObject nf = load_bundle(path, std::nullopt, opts);
    CHECK(nf.nf_id == "NF1");
    CHECK(nf.hook == "tc");
}

TEST_CASE("sidecar map declarations") {
    TempDir tmp;
    std::string asm_path = tmp.file("p.asm", kBundleText);

    SUBCASE("declared names pass, extras are fine") {
        std::string maps = tmp.file("p.maps", "# maps\nflows\nstats\n");
        NfObject nf = load_bundle(asm_path, maps);
        CHECK(nf.map_table.at(1) == "flows");
    }
    SUBCASE("duplicates are rejected") {
        std::string maps = tmp.file("p.maps", "flows\nflows\n");
        CHECK_FAILS(load_bundle(asm_path, maps), errc::duplicate_map_name);
    }
    SUBCASE("a used map must be declared") {
        std::string maps = tmp.file("p.maps", "stats\n");
        CHECK_FAILS(load_bundle(asm_path, maps), errc::parse_error);
    }
    SUBCASE("one name per line") {
        std::string maps = tmp.file("p.maps", "flows stats\n");
        CHECK_FAILS(load_bundle(asm_path, maps), errc::parse_error);
    }
}

TEST_CASE("missing inputs surface as io errors") {
    CHECK_FAILS(load_bundle("/nonexistent/p.asm", std::nullopt), errc::io_error);
    TempDir tmp;
    std::string asm_path = tmp.file("p.asm", kBundleText);
    CHECK_FAILS(load_bundle(asm_path, std::string("/nonexistent/p.maps")), errc::io_error);
    CHECK_FAILS(load_object("/nonexistent/p.o", std::nullopt), errc::io_error);
}

TEST_CASE("objects resolve map relocations against wide loads") {
    ElfProgSpec prog;
    prog.section = "xdp";
    prog.code = unpatched_code(kBundleText);
    prog.relocs = {{1, "flows"}};

    for (bool rela : {false, true}) {
        CAPTURE(rela);
        prog.use_rela = rela;
        TempDir tmp;
        std::string path = tmp.join("p.o");
        write_binary(path, build_object({prog}));
        CHECK(sniff_elf(path));

        NfObject nf = load_object(path, std::nullopt);
        CHECK(nf.nf_id == "xdp");
        CHECK(nf.hook == "xdp");
        CHECK(nf.instructions.size() == 7);
        REQUIRE(nf.map_table.count(1) == 1);
        CHECK(nf.map_table.at(1) == "flows");
        // the wide load decodes with its map marker restored
        CHECK(nf.instructions[1].kind == InsnKind::load_map_fd);
    }
}

TEST_CASE("multi-program objects need an explicit section") {
    ElfProgSpec a;
    a.section = "xdp";
    a.code = unpatched_code("mov r0, 2\nexit\n");
    ElfProgSpec b;
    b.section = "tcmark";
    b.code = unpatched_code("mov r0, 0\nexit\n");

    TempDir tmp;
    std::string path = tmp.join("two.o");
    write_binary(path, build_object({a, b}));

    CHECK_FAILS(load_object(path, std::nullopt), errc::no_program_section);

    NfObject xdp = load_object(path, std::string("xdp"));
    CHECK(xdp.nf_id == "xdp");
    CHECK(xdp.hook == "xdp");

    NfObject tc = load_object(path, std::string("tcmark"));
    CHECK(tc.nf_id == "tcmark");
    CHECK(tc.hook == "tc"); // inferred from the section prefix

    NfObject forced = load_object(path, std::string("tcmark"), std::string("xdp"));
    CHECK(forced.hook == "xdp");

    CHECK_FAILS(load_object(path, std::string("ghost")), errc::no_program_section);
}

TEST_CASE("classifier sections infer the tc hook") {
    ElfProgSpec prog;
    prog.section = "classifier/ingress";
    prog.code = unpatched_code("mov r0, 0\nexit\n");
    TempDir tmp;
    std::string path = tmp.join("cls.o");
    write_binary(path, build_object({prog}));
    CHECK(load_object(path, std::nullopt).hook == "tc");
}

TEST_CASE("relocations bind to their own program section") {
    ElfProgSpec a;
    a.section = "xdp";
    a.code = unpatched_code("ldmapfd r1, map=x\nmov r0, 2\nexit\n");
    a.relocs = {{0, "ports"}};
    ElfProgSpec b;
    b.section = "xdp_two";
    b.code = unpatched_code("ldmapfd r2, map=x\nmov r0, 1\nexit\n");
    b.relocs = {{0, "flows"}};

    TempDir tmp;
    std::string path = tmp.join("pair.o");
    write_binary(path, build_object({a, b}));

    CHECK(load_object(path, std::string("xdp")).map_table.at(0) == "ports");
    CHECK(load_object(path, std::string("xdp_two")).map_table.at(0) == "flows");
}

TEST_CASE("unclaimed wide loads are unresolved relocations") {
    ElfProgSpec prog;
    prog.section = "xdp";
    prog.code = unpatched_code(kBundleText); // wide load at slot 1, no relocs
    TempDir tmp;
    std::string path = tmp.join("p.o");
    write_binary(path, build_object({prog}));
    CHECK_FAILS(load_object(path, std::nullopt), errc::unresolved_map_relocation);
}

TEST_CASE("relocations against ordinary instructions are rejected") {
    ElfProgSpec prog;
    prog.section = "xdp";
    prog.code = unpatched_code(kBundleText);
    prog.relocs = {{0, "flows"}}; // slot 0 is a mov
    TempDir tmp;
    std::string path = tmp.join("p.o");
    write_binary(path, build_object({prog}));
    CHECK_FAILS(load_object(path, std::nullopt), errc::unresolved_map_relocation);
}

TEST_CASE("non-ELF and malformed headers are rejected") {
    TempDir tmp;
    std::string text = tmp.file("p.o", "just some text, clearly not an object\n");
    CHECK_FALSE(sniff_elf(text));
    CHECK_FAILS(load_object(text, std::nullopt), errc::not_elf);

    ElfProgSpec prog;
    prog.section = "xdp";
    prog.code = unpatched_code("mov r0, 2\nexit\n");
    std::vector<uint8_t> good = build_object({prog});

    std::vector<uint8_t> wrong_class = good;
    wrong_class[4] = 1; // 32-bit
    std::string p1 = tmp.join("class.o");
    write_binary(p1, wrong_class);
    CHECK(sniff_elf(p1)); // magic alone still matches
    CHECK_FAILS(load_object(p1, std::nullopt), errc::not_elf);

    std::vector<uint8_t> wrong_type = good;
    wrong_type[16] = 2; // ET_EXEC
    std::string p2 = tmp.join("type.o");
    write_binary(p2, wrong_type);
    CHECK_FAILS(load_object(p2, std::nullopt), errc::not_elf);

    std::vector<uint8_t> truncated(good.begin(), good.begin() + 32);
    std::string p3 = tmp.join("short.o");
    write_binary(p3, truncated);
    CHECK_FAILS(load_object(p3, std::nullopt), errc::not_elf);
}
