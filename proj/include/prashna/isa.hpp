// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prashna {

// Classification of a decoded instruction. Wide immediate loads that carry a
// map reference are their own kind; atomic read-modify-writes and byte swaps
// fold into `alu` since the dataflow rules treat them identically.
enum class InsnKind {
    alu,
    mov,
    load_mem,
    store_mem,
    load_map_fd,
    jump_cond,
    jump_uncond,
    call,
    exit_prog,
};

enum class AluOp { add, sub, mul, div, or_, and_, lsh, rsh, neg, mod, xor_, mov, arsh, swap, atomic };

enum class JmpOp { ja, jeq, jgt, jge, jset, jne, jsgt, jsge, call, exit_prog, jlt, jle, jslt, jsle };

struct Instruction {
    size_t index = 0; // slot index; wide loads occupy this slot and the next
    uint8_t opcode = 0;
    uint8_t dst_reg = 0;
    uint8_t src_reg = 0;
    int16_t offset = 0;
    int32_t imm = 0;
    std::optional<int64_t> imm64; // present only for load_map_fd
    InsnKind kind = InsnKind::exit_prog;
};

// Slot width of one encoded instruction.
inline constexpr size_t kSlotBytes = 8;

bool is_wide(uint8_t opcode);
bool is_imm_form(uint8_t opcode); // ALU/JMP classes: second operand is imm, not a register
int mem_width(uint8_t opcode);    // 1, 2, 4 or 8 for load_mem/store_mem opcodes
AluOp alu_op(uint8_t opcode);
JmpOp jmp_op(uint8_t opcode);

// Slot index a jump transfers to when taken.
int64_t jump_target(const Instruction& insn);

// Decodes raw little-endian slots. Throws TruncatedProgram, UnknownOpcode or
// BadRegister, each with the offending slot index in the message.
std::vector<Instruction> decode_program(const std::vector<uint8_t>& bytes);

// Inverse of decode_program.
std::vector<uint8_t> encode_program(const std::vector<Instruction>& instructions);

struct TextProgram {
    std::vector<Instruction> instructions;
    // slot index of each `ldmapfd` -> map name, in source order
    std::map<size_t, std::string> map_table;
};

// Parses the one-instruction-per-line assembly form. `#` starts a comment; an
// optional leading `<index>:` must match the actual slot index.
TextProgram parse_text_program(const std::string& text);

std::string instructions_to_text(const std::vector<Instruction>& instructions,
                                 const std::map<size_t, std::string>& map_table);

} // namespace prashna
