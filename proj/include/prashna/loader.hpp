// SPDX-License-Identifier: MIT
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prashna/isa.hpp"

namespace prashna {

// One network function ready for analysis.
struct NfObject {
    std::string nf_id;
    std::string hook;
    std::vector<Instruction> instructions;
    std::map<size_t, std::string> map_table; // wide-load slot -> map name
};

struct BundleOptions {
    std::optional<std::string> name; // default: file stem
    std::optional<std::string> hook; // default: "xdp"
};

// Loads the assembly text form, optionally with a sidecar file listing map
// names one per line (their order defines map ordinals). Without a sidecar,
// names referenced by ldmapfd register themselves in order of appearance.
NfObject load_bundle(const std::string& asm_path, const std::optional<std::string>& maps_path,
                     const BundleOptions& options = {});

// Loads one program from a relocatable ELF object. `section` picks the
// program section; required when the object holds more than one. Map names
// come from relocation symbols against wide loads.
NfObject load_object(const std::string& obj_path, const std::optional<std::string>& section,
                     const std::optional<std::string>& hook_override = {});

// True when the file starts with the ELF magic.
bool sniff_elf(const std::string& path);

} // namespace prashna
