// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prashna/cfg.hpp"
#include "prashna/loader.hpp"
#include "prashna/netspec.hpp"

namespace prashna {

enum class ValueTag {
    unknown,
    pkt_buff,       // pointer to the hook context struct
    pkt_data_start, // pointer into packet data; value = byte offset from start
    pkt_data_end,
    constant,       // value = the constant
    ref_map,        // map reference; value = slot of the originating wide load
    stack_frame,    // pointer into the 512-byte frame; value = offset from r10
};

struct TaggedCell {
    ValueTag tag = ValueTag::unknown;
    std::optional<int64_t> value;
    std::optional<std::string> field; // qualified name of the field this was loaded from
};

struct PathPair {
    std::string field;
    int64_t value = 0;
    bool negated = false;

    auto operator<=>(const PathPair&) const = default;
};

struct ContextItem {
    enum class Kind {
        read_buffer_field,
        read_header_field,
        write_buffer_field,
        write_header_field,
        read_from_map,
        write_into_map,
        correlated_maps,
        invoke_helper,
        protocol_accessed,
    };
    Kind kind{};
    std::string a;
    std::string b;

    auto operator<=>(const ContextItem&) const = default;
};

const char* context_kind_name(ContextItem::Kind kind);

struct PathAction {
    std::string hook;
    std::string action;
    std::vector<std::string> blocks;
    std::vector<PathPair> pairs;
};

struct StackSlot {
    enum class State : uint8_t { empty, base, cover };
    State state = State::empty;
    TaggedCell cell; // meaningful for base slots
    int width = 0;   // meaningful for base slots
    int owner = 0;   // meaningful for cover slots: index of the base
};

inline constexpr int kStackBytes = 512;

struct AbstractState {
    std::array<TaggedCell, 11> reg;
    std::array<StackSlot, kStackBytes> stack;
    std::string curr_proto;
    std::optional<std::string> next_proto;
    int64_t proto_base = 0;
    // protocols committed so far with their base offsets, ascending
    std::vector<std::pair<std::string, int64_t>> committed;
    std::vector<PathPair> pairs;
    bool entry_proto_recorded = false;
};

AbstractState init_state(const NfObject& nf, const NetSpec& spec);

// Applies one non-branching instruction. `next_insn` (the following
// instruction in program order, if any) lets a header load that feeds an
// immediately following equality test on a dispatch field collapse into a
// pure protocol check instead of a field read.
std::vector<ContextItem> step(AbstractState& state, const Instruction& insn,
                              const Instruction* next_insn, const NfObject& nf,
                              const NetSpec& spec);

// Applies the knowledge a conditional branch contributes along one edge:
// equality outcomes against immediates and packet-bounds establishment.
std::vector<ContextItem> apply_branch(AbstractState& state, const Instruction& insn, bool taken,
                                      const NfObject& nf, const NetSpec& spec);

struct CfgNc {
    Cfg cfg;
    std::map<std::string, std::set<ContextItem>> block_ctx;
    std::vector<PathAction> path_actions;
    uint64_t paths_walked = 0;
};

CfgNc analyze_nf(const NfObject& nf, const NetSpec& spec);
CfgNc analyze_nf(const NfObject& nf, const NetSpec& spec, uint64_t path_budget);

std::string cfgnc_to_json(const CfgNc& result);

} // namespace prashna
