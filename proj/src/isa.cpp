// SPDX-License-Identifier: MIT
#include "prashna/isa.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <iterator>
#include <sstream>

#include "prashna/errors.hpp"

namespace prashna {

namespace {

constexpr uint8_t kClassMask = 0x07;
constexpr uint8_t kClassLd = 0x00;
constexpr uint8_t kClassLdx = 0x01;
constexpr uint8_t kClassSt = 0x02;
constexpr uint8_t kClassStx = 0x03;
constexpr uint8_t kClassAlu32 = 0x04;
constexpr uint8_t kClassJmp = 0x05;
constexpr uint8_t kClassJmp32 = 0x06;
constexpr uint8_t kClassAlu64 = 0x07;

constexpr uint8_t kSrcBit = 0x08;

constexpr uint8_t kSizeMask = 0x18;
constexpr uint8_t kSizeW = 0x00;
constexpr uint8_t kSizeH = 0x08;
constexpr uint8_t kSizeB = 0x10;
constexpr uint8_t kSizeDw = 0x18;

constexpr uint8_t kModeMask = 0xe0;
constexpr uint8_t kModeMem = 0x60;
constexpr uint8_t kModeAtomic = 0xc0;

constexpr uint8_t kOpMask = 0xf0;

constexpr uint8_t kWideLoadOpcode = 0x18;
// src_reg value marking a wide load that names a map object
constexpr uint8_t kPseudoMapFd = 1;

std::string hex_str(uint64_t value) {
    std::ostringstream os;
    os << std::hex << value;
    return os.str();
}

std::string at_slot(size_t index) { return "slot " + std::to_string(index); }

[[noreturn]] void bad_opcode(uint8_t opcode, size_t index) {
    fail(errc::unknown_opcode, "opcode 0x" + hex_str(opcode) + " at " + at_slot(index));
}

bool is_alu_class(uint8_t cls) { return cls == kClassAlu32 || cls == kClassAlu64; }
bool is_jmp_class(uint8_t cls) { return cls == kClassJmp || cls == kClassJmp32; }

bool known_cond_jmp_op(uint8_t op) {
    switch (op) {
    case 0x10: case 0x20: case 0x30: case 0x40: case 0x50:
    case 0x60: case 0x70: case 0xa0: case 0xb0: case 0xc0: case 0xd0:
        return true;
    default:
        return false;
    }
}

void check_registers(const Instruction& insn) {
    if (insn.dst_reg > 10)
        fail(errc::bad_register, "dst r" + std::to_string(insn.dst_reg) + " at " + at_slot(insn.index));
    if (insn.src_reg > 10 && insn.kind != InsnKind::load_map_fd)
        fail(errc::bad_register, "src r" + std::to_string(insn.src_reg) + " at " + at_slot(insn.index));
}

InsnKind classify(const Instruction& insn) {
    const uint8_t cls = insn.opcode & kClassMask;
    const uint8_t op = insn.opcode & kOpMask;
    if (is_alu_class(cls)) {
        if (op == 0xb0)
            return InsnKind::mov;
        if (op == 0x80 || op == 0xd0) { // neg and byte swap carry no register source
            if (insn.opcode & kSrcBit)
                bad_opcode(insn.opcode, insn.index);
            if (op == 0xd0 && cls == kClassAlu64)
                bad_opcode(insn.opcode, insn.index);
        }
        if (op > 0xd0)
            bad_opcode(insn.opcode, insn.index);
        return InsnKind::alu;
    }
    if (is_jmp_class(cls)) {
        if (insn.opcode == 0x05)
            return InsnKind::jump_uncond;
        if (insn.opcode == 0x85)
            return InsnKind::call;
        if (insn.opcode == 0x95)
            return InsnKind::exit_prog;
        if (known_cond_jmp_op(op))
            return InsnKind::jump_cond;
        bad_opcode(insn.opcode, insn.index);
    }
    const uint8_t mode = insn.opcode & kModeMask;
    if (cls == kClassLdx && mode == kModeMem)
        return InsnKind::load_mem;
    if ((cls == kClassSt || cls == kClassStx) && mode == kModeMem)
        return InsnKind::store_mem;
    if (cls == kClassStx && mode == kModeAtomic) {
        const uint8_t size = insn.opcode & kSizeMask;
        if (size == kSizeW || size == kSizeDw)
            return InsnKind::alu;
    }
    if (cls == kClassLd && insn.opcode == kWideLoadOpcode)
        return InsnKind::load_map_fd;
    bad_opcode(insn.opcode, insn.index);
}

} // namespace

bool is_wide(uint8_t opcode) { return opcode == kWideLoadOpcode; }

bool is_imm_form(uint8_t opcode) { return (opcode & kSrcBit) == 0; }

int mem_width(uint8_t opcode) {
    switch (opcode & kSizeMask) {
    case kSizeW: return 4;
    case kSizeH: return 2;
    case kSizeB: return 1;
    default: return 8;
    }
}

AluOp alu_op(uint8_t opcode) {
    if ((opcode & kClassMask) == kClassStx && (opcode & kModeMask) == kModeAtomic)
        return AluOp::atomic;
    switch (opcode & kOpMask) {
    case 0x00: return AluOp::add;
    case 0x10: return AluOp::sub;
    case 0x20: return AluOp::mul;
    case 0x30: return AluOp::div;
    case 0x40: return AluOp::or_;
    case 0x50: return AluOp::and_;
    case 0x60: return AluOp::lsh;
    case 0x70: return AluOp::rsh;
    case 0x80: return AluOp::neg;
    case 0x90: return AluOp::mod;
    case 0xa0: return AluOp::xor_;
    case 0xb0: return AluOp::mov;
    case 0xc0: return AluOp::arsh;
    default: return AluOp::swap;
    }
}

JmpOp jmp_op(uint8_t opcode) {
    switch (opcode & kOpMask) {
    case 0x00: return JmpOp::ja;
    case 0x10: return JmpOp::jeq;
    case 0x20: return JmpOp::jgt;
    case 0x30: return JmpOp::jge;
    case 0x40: return JmpOp::jset;
    case 0x50: return JmpOp::jne;
    case 0x60: return JmpOp::jsgt;
    case 0x70: return JmpOp::jsge;
    case 0x80: return JmpOp::call;
    case 0x90: return JmpOp::exit_prog;
    case 0xa0: return JmpOp::jlt;
    case 0xb0: return JmpOp::jle;
    case 0xc0: return JmpOp::jslt;
    default: return JmpOp::jsle;
    }
}

int64_t jump_target(const Instruction& insn) {
    return static_cast<int64_t>(insn.index) + 1 + insn.offset;
}

std::vector<Instruction> decode_program(const std::vector<uint8_t>& bytes) {
    if (bytes.size() % kSlotBytes != 0)
        fail(errc::truncated_program,
             "byte length " + std::to_string(bytes.size()) + " is not a multiple of 8");
    const size_t slots = bytes.size() / kSlotBytes;
    std::vector<Instruction> out;
    out.reserve(slots);
    for (size_t i = 0; i < slots; ++i) {
        const uint8_t* p = bytes.data() + i * kSlotBytes;
        Instruction insn;
        insn.index = i;
        insn.opcode = p[0];
        insn.dst_reg = p[1] & 0x0f;
        insn.src_reg = (p[1] >> 4) & 0x0f;
        uint16_t off_raw = static_cast<uint16_t>(p[2]) | static_cast<uint16_t>(p[3]) << 8;
        std::memcpy(&insn.offset, &off_raw, sizeof insn.offset);
        uint32_t imm_raw = static_cast<uint32_t>(p[4]) | static_cast<uint32_t>(p[5]) << 8 |
                           static_cast<uint32_t>(p[6]) << 16 | static_cast<uint32_t>(p[7]) << 24;
        std::memcpy(&insn.imm, &imm_raw, sizeof insn.imm);

        insn.kind = classify(insn);

        if (insn.kind == InsnKind::load_map_fd) {
            if (insn.src_reg != kPseudoMapFd)
                fail(errc::unknown_opcode, "wide load without map reference at " + at_slot(i));
            if (insn.dst_reg > 10)
                fail(errc::bad_register, "dst r" + std::to_string(insn.dst_reg) + " at " + at_slot(i));
            if (i + 1 >= slots)
                fail(errc::truncated_program, "wide load missing second slot at " + at_slot(i));
            const uint8_t* q = bytes.data() + (i + 1) * kSlotBytes;
            if (q[0] != 0 || q[1] != 0 || q[2] != 0 || q[3] != 0)
                fail(errc::unknown_opcode, "malformed wide load continuation at " + at_slot(i + 1));
            uint32_t hi = static_cast<uint32_t>(q[4]) | static_cast<uint32_t>(q[5]) << 8 |
                          static_cast<uint32_t>(q[6]) << 16 | static_cast<uint32_t>(q[7]) << 24;
            insn.imm64 = static_cast<int64_t>(
                (static_cast<uint64_t>(hi) << 32) | static_cast<uint32_t>(insn.imm));
            ++i;
        } else {
            check_registers(insn);
            if (insn.kind == InsnKind::call && insn.src_reg != 0)
                fail(errc::unknown_opcode, "unsupported call form at " + at_slot(i));
        }
        out.push_back(insn);
    }
    return out;
}

std::vector<uint8_t> encode_program(const std::vector<Instruction>& instructions) {
    std::vector<uint8_t> out;
    auto put_slot = [&out](uint8_t opcode, uint8_t dst, uint8_t src, int16_t off, int32_t imm) {
        out.push_back(opcode);
        out.push_back(static_cast<uint8_t>((src << 4) | (dst & 0x0f)));
        uint16_t off_raw;
        std::memcpy(&off_raw, &off, sizeof off_raw);
        out.push_back(static_cast<uint8_t>(off_raw & 0xff));
        out.push_back(static_cast<uint8_t>(off_raw >> 8));
        uint32_t imm_raw;
        std::memcpy(&imm_raw, &imm, sizeof imm_raw);
        for (int b = 0; b < 4; ++b)
            out.push_back(static_cast<uint8_t>((imm_raw >> (8 * b)) & 0xff));
    };
    for (const Instruction& insn : instructions) {
        if (insn.kind == InsnKind::load_map_fd) {
            uint64_t v = static_cast<uint64_t>(insn.imm64.value_or(insn.imm));
            put_slot(insn.opcode, insn.dst_reg, insn.src_reg, insn.offset,
                     static_cast<int32_t>(static_cast<uint32_t>(v & 0xffffffff)));
            put_slot(0, 0, 0, 0, static_cast<int32_t>(static_cast<uint32_t>(v >> 32)));
        } else {
            put_slot(insn.opcode, insn.dst_reg, insn.src_reg, insn.offset, insn.imm);
        }
    }
    return out;
}

namespace {

struct Mnemonic {
    const char* name;
    uint8_t imm_opcode;
    uint8_t reg_opcode;
};

const Mnemonic kAluTable[] = {
    {"mov", 0xb7, 0xbf},      {"mov32", 0xb4, 0xbc},    {"aluadd", 0x07, 0x0f},
    {"alusub", 0x17, 0x1f},   {"alumul", 0x27, 0x2f},   {"aludiv", 0x37, 0x3f},
    {"aluor", 0x47, 0x4f},    {"aluand", 0x57, 0x5f},   {"alulsh", 0x67, 0x6f},
    {"alursh", 0x77, 0x7f},   {"alumod", 0x97, 0x9f},   {"aluxor", 0xa7, 0xaf},
    {"aluarsh", 0xc7, 0xcf},  {"alu32add", 0x04, 0x0c}, {"alu32sub", 0x14, 0x1c},
    {"alu32and", 0x54, 0x5c}, {"alu32or", 0x44, 0x4c},  {"alu32lsh", 0x64, 0x6c},
    {"alu32rsh", 0x74, 0x7c},
};

const Mnemonic kJmpTable[] = {
    {"jeq", 0x15, 0x1d},   {"jgt", 0x25, 0x2d},   {"jge", 0x35, 0x3d},
    {"jset", 0x45, 0x4d},  {"jne", 0x55, 0x5d},   {"jsgt", 0x65, 0x6d},
    {"jsge", 0x75, 0x7d},  {"jlt", 0xa5, 0xad},   {"jle", 0xb5, 0xbd},
    {"jslt", 0xc5, 0xcd},  {"jsle", 0xd5, 0xdd},  {"jeq32", 0x16, 0x1e},
    {"jne32", 0x56, 0x5e}, {"jgt32", 0x26, 0x2e}, {"jlt32", 0xa6, 0xae},
};

const char* kLoadNames[] = {"ldxw", "ldxh", "ldxb", "ldxdw"};
const uint8_t kLoadOps[] = {0x61, 0x69, 0x71, 0x79};
const char* kStoreRegNames[] = {"stxw", "stxh", "stxb", "stxdw"};
const uint8_t kStoreRegOps[] = {0x63, 0x6b, 0x73, 0x7b};
const char* kStoreImmNames[] = {"stw", "sth", "stb", "stdw"};
const uint8_t kStoreImmOps[] = {0x62, 0x6a, 0x72, 0x7a};

class LineParser {
  public:
    LineParser(const std::string& line, size_t lineno) : s_(line), lineno_(lineno) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
            ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c))
            err(std::string("expected '") + c + "'");
    }

    std::string word() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (start == pos_)
            err("expected identifier");
        return s_.substr(start, pos_ - start);
    }

    int64_t number() {
        skip_ws();
        bool neg = false;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            neg = s_[pos_] == '-';
            ++pos_;
        }
        int base = 10;
        if (pos_ + 1 < s_.size() && s_[pos_] == '0' && (s_[pos_ + 1] == 'x' || s_[pos_ + 1] == 'X')) {
            base = 16;
            pos_ += 2;
        }
        size_t digits = pos_;
        uint64_t value = 0;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            int d;
            if (c >= '0' && c <= '9')
                d = c - '0';
            else if (base == 16 && c >= 'a' && c <= 'f')
                d = c - 'a' + 10;
            else if (base == 16 && c >= 'A' && c <= 'F')
                d = c - 'A' + 10;
            else
                break;
            value = value * static_cast<uint64_t>(base) + static_cast<uint64_t>(d);
            ++pos_;
        }
        if (pos_ == digits)
            err("expected number");
        int64_t sv = static_cast<int64_t>(value);
        return neg ? -sv : sv;
    }

    uint8_t reg() {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != 'r')
            err("expected register");
        ++pos_;
        int64_t n = number();
        if (n < 0 || n > 10)
            err("register r" + std::to_string(n) + " out of range");
        return static_cast<uint8_t>(n);
    }

    bool peek_reg() {
        skip_ws();
        return pos_ + 1 < s_.size() && s_[pos_] == 'r' &&
               std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]));
    }

    [[noreturn]] void err(const std::string& what) {
        fail(errc::parse_error, "line " + std::to_string(lineno_) + ": " + what);
    }

  private:
    const std::string& s_;
    size_t lineno_;
    size_t pos_ = 0;
};

int32_t checked_imm(LineParser& p, int64_t v) {
    if (v < INT32_MIN || v > INT64_C(0xffffffff))
        p.err("immediate out of range");
    // unsigned 32-bit spellings like 0xffffff00 wrap to the signed field
    return static_cast<int32_t>(static_cast<uint32_t>(v));
}

int16_t checked_off(LineParser& p, int64_t v) {
    if (v < INT16_MIN || v > INT16_MAX)
        p.err("offset out of range");
    return static_cast<int16_t>(v);
}

const Mnemonic* find_mnemonic(const Mnemonic* table, size_t n, const std::string& name) {
    for (size_t i = 0; i < n; ++i)
        if (name == table[i].name)
            return &table[i];
    return nullptr;
}

std::string raw_render(const Instruction& insn) {
    std::vector<uint8_t> bytes = encode_program({insn});
    uint64_t u = 0;
    for (int b = 7; b >= 0; --b)
        u = (u << 8) | bytes[static_cast<size_t>(b)];
    return "raw 0x" + hex_str(u);
}

} // namespace

TextProgram parse_text_program(const std::string& text) {
    TextProgram prog;
    std::istringstream in(text);
    std::string raw;
    size_t lineno = 0;
    size_t slot = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
            raw.pop_back();
        if (raw.find_first_not_of(" \t") == std::string::npos)
            continue;
        LineParser p(raw, lineno);

        {
            size_t colon = raw.find(':');
            if (colon != std::string::npos &&
                raw.find_first_not_of("0123456789 \t") == colon) {
                int64_t idx = p.number();
                p.expect(':');
                if (idx < 0 || static_cast<size_t>(idx) != slot)
                    p.err("label index " + std::to_string(idx) + " does not match slot " +
                          std::to_string(slot));
            }
        }

        std::string op = p.word();
        Instruction insn;
        insn.index = slot;

        if (const Mnemonic* m = find_mnemonic(kAluTable, std::size(kAluTable), op)) {
            insn.dst_reg = p.reg();
            p.expect(',');
            if (p.peek_reg()) {
                insn.src_reg = p.reg();
                insn.opcode = m->reg_opcode;
            } else {
                insn.imm = checked_imm(p, p.number());
                insn.opcode = m->imm_opcode;
            }
            insn.kind = (insn.opcode & kOpMask) == 0xb0 ? InsnKind::mov : InsnKind::alu;
        } else if (op == "aluneg") {
            insn.dst_reg = p.reg();
            insn.opcode = 0x87;
            insn.kind = InsnKind::alu;
        } else if (const Mnemonic* j = find_mnemonic(kJmpTable, std::size(kJmpTable), op)) {
            insn.dst_reg = p.reg();
            p.expect(',');
            if (p.peek_reg()) {
                insn.src_reg = p.reg();
                insn.opcode = j->reg_opcode;
            } else {
                insn.imm = checked_imm(p, p.number());
                insn.opcode = j->imm_opcode;
            }
            p.expect(',');
            insn.offset = checked_off(p, p.number());
            insn.kind = InsnKind::jump_cond;
        } else if (op == "jmp") {
            insn.opcode = 0x05;
            insn.offset = checked_off(p, p.number());
            insn.kind = InsnKind::jump_uncond;
        } else if (op == "call") {
            insn.opcode = 0x85;
            insn.imm = checked_imm(p, p.number());
            insn.kind = InsnKind::call;
        } else if (op == "exit") {
            insn.opcode = 0x95;
            insn.kind = InsnKind::exit_prog;
        } else if (op == "ldmapfd") {
            insn.opcode = kWideLoadOpcode;
            insn.dst_reg = p.reg();
            p.expect(',');
            if (p.word() != "map")
                p.err("expected map=<name>");
            p.expect('=');
            insn.src_reg = kPseudoMapFd;
            insn.kind = InsnKind::load_map_fd;
            insn.imm64 = 0;
            prog.map_table[slot] = p.word();
        } else if (const char* const* ld = std::find(std::begin(kLoadNames), std::end(kLoadNames), op);
                   ld != std::end(kLoadNames)) {
            insn.opcode = kLoadOps[ld - std::begin(kLoadNames)];
            insn.dst_reg = p.reg();
            p.expect(',');
            p.expect('[');
            insn.src_reg = p.reg();
            insn.offset = checked_off(p, p.number());
            p.expect(']');
            insn.kind = InsnKind::load_mem;
        } else if (const char* const* st = std::find(std::begin(kStoreRegNames), std::end(kStoreRegNames), op);
                   st != std::end(kStoreRegNames)) {
            insn.opcode = kStoreRegOps[st - std::begin(kStoreRegNames)];
            p.expect('[');
            insn.dst_reg = p.reg();
            insn.offset = checked_off(p, p.number());
            p.expect(']');
            p.expect(',');
            insn.src_reg = p.reg();
            insn.kind = InsnKind::store_mem;
        } else if (const char* const* sti = std::find(std::begin(kStoreImmNames), std::end(kStoreImmNames), op);
                   sti != std::end(kStoreImmNames)) {
            insn.opcode = kStoreImmOps[sti - std::begin(kStoreImmNames)];
            p.expect('[');
            insn.dst_reg = p.reg();
            insn.offset = checked_off(p, p.number());
            p.expect(']');
            p.expect(',');
            insn.imm = checked_imm(p, p.number());
            insn.kind = InsnKind::store_mem;
        } else if (op == "raw") {
            int64_t v = p.number();
            uint64_t u = static_cast<uint64_t>(v);
            std::vector<uint8_t> bytes(8);
            for (int b = 0; b < 8; ++b)
                bytes[static_cast<size_t>(b)] = static_cast<uint8_t>((u >> (8 * b)) & 0xff);
            try {
                insn = decode_program(bytes).at(0);
            } catch (const Error& e) {
                p.err(e.what());
            }
            insn.index = slot;
        } else {
            p.err("unknown mnemonic '" + op + "'");
        }

        if (!p.at_end())
            p.err("trailing characters");

        prog.instructions.push_back(insn);
        slot += is_wide(insn.opcode) ? 2 : 1;
    }
    return prog;
}

std::string instructions_to_text(const std::vector<Instruction>& instructions,
                                 const std::map<size_t, std::string>& map_table) {
    std::ostringstream os;
    auto off_str = [](int32_t v) {
        return v >= 0 ? "+" + std::to_string(v) : std::to_string(v);
    };
    auto mem_ref = [&off_str](uint8_t base, int16_t off) {
        return "[r" + std::to_string(base) + off_str(off) + "]";
    };
    for (const Instruction& insn : instructions) {
        os << insn.index << ": ";
        switch (insn.kind) {
        case InsnKind::mov:
        case InsnKind::alu: {
            if ((insn.opcode & kClassMask) == kClassStx) { // atomic: no dedicated mnemonic
                os << raw_render(insn);
                break;
            }
            if (insn.opcode == 0x87) {
                os << "aluneg r" << int(insn.dst_reg);
                break;
            }
            const Mnemonic* found = nullptr;
            for (const Mnemonic& m : kAluTable) {
                if (insn.opcode == m.imm_opcode || insn.opcode == m.reg_opcode) {
                    found = &m;
                    break;
                }
            }
            if (found == nullptr) {
                os << raw_render(insn);
                break;
            }
            os << found->name << " r" << int(insn.dst_reg) << ", ";
            if (insn.opcode == found->imm_opcode)
                os << insn.imm;
            else
                os << 'r' << int(insn.src_reg);
            break;
        }
        case InsnKind::jump_cond: {
            const Mnemonic* found = nullptr;
            for (const Mnemonic& m : kJmpTable) {
                if (insn.opcode == m.imm_opcode || insn.opcode == m.reg_opcode) {
                    found = &m;
                    break;
                }
            }
            if (found == nullptr) {
                os << raw_render(insn);
                break;
            }
            os << found->name << " r" << int(insn.dst_reg) << ", ";
            if (insn.opcode == found->imm_opcode)
                os << insn.imm;
            else
                os << 'r' << int(insn.src_reg);
            os << ", " << off_str(insn.offset);
            break;
        }
        case InsnKind::jump_uncond:
            os << "jmp " << off_str(insn.offset);
            break;
        case InsnKind::call:
            os << "call " << insn.imm;
            break;
        case InsnKind::exit_prog:
            os << "exit";
            break;
        case InsnKind::load_mem: {
            size_t si = 0;
            for (size_t i = 0; i < std::size(kLoadOps); ++i)
                if (kLoadOps[i] == insn.opcode)
                    si = i;
            os << kLoadNames[si] << " r" << int(insn.dst_reg) << ", "
               << mem_ref(insn.src_reg, insn.offset);
            break;
        }
        case InsnKind::store_mem: {
            if ((insn.opcode & kClassMask) == kClassStx) {
                size_t si = 0;
                for (size_t i = 0; i < std::size(kStoreRegOps); ++i)
                    if (kStoreRegOps[i] == insn.opcode)
                        si = i;
                os << kStoreRegNames[si] << " " << mem_ref(insn.dst_reg, insn.offset) << ", r"
                   << int(insn.src_reg);
            } else {
                size_t si = 0;
                for (size_t i = 0; i < std::size(kStoreImmOps); ++i)
                    if (kStoreImmOps[i] == insn.opcode)
                        si = i;
                os << kStoreImmNames[si] << " " << mem_ref(insn.dst_reg, insn.offset) << ", "
                   << insn.imm;
            }
            break;
        }
        case InsnKind::load_map_fd: {
            auto it = map_table.find(insn.index);
            os << "ldmapfd r" << int(insn.dst_reg) << ", map=";
            if (it != map_table.end())
                os << it->second;
            else
                os << "m" << insn.index;
            break;
        }
        }
        os << '\n';
    }
    return os.str();
}

} // namespace prashna
