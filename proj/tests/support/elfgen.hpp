// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prashna::testsupport {

struct ElfMapRef {
    size_t slot;        // wide-load slot the relocation patches
    std::string symbol; // map name
};

struct ElfProgSpec {
    std::string section = "xdp";
    std::vector<uint8_t> code;
    std::vector<ElfMapRef> relocs;
    bool use_rela = false;
};

// Builds a little-endian ELF64 relocatable object holding the given program
// sections, a shared string/symbol table and one REL(A) section per program
// that has relocations.
std::vector<uint8_t> build_object(const std::vector<ElfProgSpec>& progs);

void write_binary(const std::string& path, const std::vector<uint8_t>& bytes);

} // namespace prashna::testsupport
