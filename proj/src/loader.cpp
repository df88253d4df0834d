// SPDX-License-Identifier: MIT
#include "prashna/loader.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "prashna/errors.hpp"

namespace prashna {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

std::string file_stem(const std::string& path) {
    size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = base.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

std::string infer_hook(const std::string& section_name) {
    if (section_name.rfind("tc", 0) == 0 || section_name.rfind("classifier", 0) == 0)
        return "tc";
    return "xdp";
}

class ElfReader {
  public:
    explicit ElfReader(const std::vector<uint8_t>& bytes) : b_(bytes) {}

    uint8_t u8(size_t off) const {
        check(off, 1);
        return b_[off];
    }
    uint16_t u16(size_t off) const {
        check(off, 2);
        return static_cast<uint16_t>(b_[off] | b_[off + 1] << 8);
    }
    uint32_t u32(size_t off) const {
        check(off, 4);
        return static_cast<uint32_t>(b_[off]) | static_cast<uint32_t>(b_[off + 1]) << 8 |
               static_cast<uint32_t>(b_[off + 2]) << 16 | static_cast<uint32_t>(b_[off + 3]) << 24;
    }
    uint64_t u64(size_t off) const {
        return static_cast<uint64_t>(u32(off)) | static_cast<uint64_t>(u32(off + 4)) << 32;
    }
    std::vector<uint8_t> chunk(size_t off, size_t len) const {
        check(off, len);
        return std::vector<uint8_t>(b_.begin() + static_cast<long>(off),
                                    b_.begin() + static_cast<long>(off + len));
    }
    std::string cstr(size_t off) const {
        std::string s;
        while (off < b_.size() && b_[off] != 0)
            s.push_back(static_cast<char>(b_[off++]));
        if (off >= b_.size())
            fail(errc::not_elf, "unterminated string table entry");
        return s;
    }
    size_t size() const { return b_.size(); }

  private:
    void check(size_t off, size_t len) const {
        if (off + len > b_.size() || off + len < off)
            fail(errc::not_elf, "truncated object file");
    }
    const std::vector<uint8_t>& b_;
};

struct Section {
    std::string name;
    uint32_t type = 0;
    uint64_t flags = 0;
    uint64_t offset = 0;
    uint64_t size = 0;
    uint32_t link = 0;
    uint32_t info = 0;
    uint64_t entsize = 0;
};

constexpr uint32_t kShtProgbits = 1;
constexpr uint32_t kShtSymtab = 2;
constexpr uint32_t kShtRela = 4;
constexpr uint32_t kShtRel = 9;
constexpr uint64_t kShfExecinstr = 0x4;
constexpr uint16_t kEtRel = 1;

} // namespace

bool sniff_elf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && magic[0] == 0x7f && magic[1] == 'E' && magic[2] == 'L' &&
           magic[3] == 'F';
}

NfObject load_bundle(const std::string& asm_path, const std::optional<std::string>& maps_path,
                     const BundleOptions& options) {
    std::vector<uint8_t> raw = read_file(asm_path);
    TextProgram prog = parse_text_program(std::string(raw.begin(), raw.end()));

    if (maps_path) {
        std::vector<uint8_t> side = read_file(*maps_path);
        std::istringstream in(std::string(side.begin(), side.end()));
        std::string line;
        std::vector<std::string> declared;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            std::istringstream ls(line);
            std::string name;
            if (!(ls >> name))
                continue;
            std::string extra;
            if (ls >> extra)
                fail(errc::parse_error,
                     *maps_path + " line " + std::to_string(lineno) + ": one name per line");
            for (const std::string& seen : declared)
                if (seen == name)
                    fail(errc::duplicate_map_name, name + " declared twice in " + *maps_path);
            declared.push_back(name);
        }
        for (const auto& [slot, name] : prog.map_table) {
            bool found = false;
            for (const std::string& seen : declared)
                found = found || seen == name;
            if (!found)
                fail(errc::parse_error, "map '" + name + "' used at slot " +
                                            std::to_string(slot) + " is not declared in " +
                                            *maps_path);
        }
    }

    NfObject nf;
    nf.nf_id = options.name.value_or(file_stem(asm_path));
    nf.hook = options.hook.value_or("xdp");
    nf.instructions = std::move(prog.instructions);
    nf.map_table = std::move(prog.map_table);
    return nf;
}

NfObject load_object(const std::string& obj_path, const std::optional<std::string>& section,
                     const std::optional<std::string>& hook_override) {
    std::vector<uint8_t> bytes = read_file(obj_path);
    ElfReader r(bytes);
    if (bytes.size() < 64 || r.u8(0) != 0x7f || r.u8(1) != 'E' || r.u8(2) != 'L' || r.u8(3) != 'F')
        fail(errc::not_elf, obj_path + " lacks the ELF magic");
    if (r.u8(4) != 2 || r.u8(5) != 1)
        fail(errc::not_elf, obj_path + " is not a little-endian 64-bit object");
    if (r.u16(16) != kEtRel)
        fail(errc::not_elf, obj_path + " is not a relocatable object");

    uint64_t shoff = r.u64(40);
    uint16_t shentsize = r.u16(58);
    uint16_t shnum = r.u16(60);
    uint16_t shstrndx = r.u16(62);
    if (shentsize != 64 || shnum == 0 || shstrndx >= shnum)
        fail(errc::not_elf, obj_path + " has a malformed section table");

    std::vector<Section> sections(shnum);
    for (uint16_t i = 0; i < shnum; ++i) {
        size_t base = shoff + static_cast<size_t>(i) * shentsize;
        sections[i].type = r.u32(base + 4);
        sections[i].flags = r.u64(base + 8);
        sections[i].offset = r.u64(base + 24);
        sections[i].size = r.u64(base + 32);
        sections[i].link = r.u32(base + 40);
        sections[i].info = r.u32(base + 44);
        sections[i].entsize = r.u64(base + 56);
    }
    uint64_t shstr_off = sections[shstrndx].offset;
    for (uint16_t i = 0; i < shnum; ++i) {
        size_t base = shoff + static_cast<size_t>(i) * shentsize;
        sections[i].name = r.cstr(shstr_off + r.u32(base));
    }

    size_t prog_index = shnum;
    if (section) {
        for (uint16_t i = 0; i < shnum; ++i)
            if (sections[i].name == *section && sections[i].type == kShtProgbits)
                prog_index = i;
        if (prog_index == shnum)
            fail(errc::no_program_section, "no section named '" + *section + "' in " + obj_path);
    } else {
        std::vector<size_t> candidates;
        for (uint16_t i = 0; i < shnum; ++i)
            if (sections[i].type == kShtProgbits && (sections[i].flags & kShfExecinstr) &&
                sections[i].size > 0)
                candidates.push_back(i);
        if (candidates.empty())
            fail(errc::no_program_section, "no executable section in " + obj_path);
        if (candidates.size() > 1) {
            std::string names;
            for (size_t c : candidates)
                names += (names.empty() ? "" : ", ") + sections[c].name;
            fail(errc::no_program_section,
                 obj_path + " holds several programs (" + names + "); pick one");
        }
        prog_index = candidates[0];
    }

    std::vector<uint8_t> code = r.chunk(sections[prog_index].offset, sections[prog_index].size);

    // symbol table for relocation names
    size_t symtab_index = shnum;
    for (uint16_t i = 0; i < shnum; ++i)
        if (sections[i].type == kShtSymtab)
            symtab_index = i;

    NfObject nf;
    for (uint16_t i = 0; i < shnum; ++i) {
        const Section& rel = sections[i];
        if ((rel.type != kShtRel && rel.type != kShtRela) || rel.info != prog_index)
            continue;
        if (symtab_index == shnum)
            fail(errc::unresolved_map_relocation, obj_path + " relocates without a symbol table");
        const Section& symtab = sections[symtab_index];
        uint64_t strtab_off = sections[symtab.link].offset;
        size_t entsize = rel.type == kShtRel ? 16 : 24;
        for (uint64_t off = 0; off + entsize <= rel.size; off += entsize) {
            uint64_t r_offset = r.u64(rel.offset + off);
            uint64_t r_info = r.u64(rel.offset + off + 8);
            uint64_t sym_index = r_info >> 32;
            size_t slot = r_offset / kSlotBytes;
            if (r_offset % kSlotBytes != 0 || (slot + 1) * kSlotBytes > code.size())
                fail(errc::unresolved_map_relocation,
                     "relocation at byte " + std::to_string(r_offset) + " is misaligned");
            if (code[slot * kSlotBytes] != 0x18)
                fail(errc::unresolved_map_relocation,
                     "relocation against non-map instruction at slot " + std::to_string(slot));
            uint64_t sym_off = symtab.offset + sym_index * 24;
            if (sym_index * 24 + 24 > symtab.size)
                fail(errc::unresolved_map_relocation,
                     "relocation names symbol " + std::to_string(sym_index) + " out of range");
            std::string name = r.cstr(strtab_off + r.u32(sym_off));
            if (name.empty())
                fail(errc::unresolved_map_relocation,
                     "relocation at slot " + std::to_string(slot) + " names an unnamed symbol");
            code[slot * kSlotBytes + 1] =
                static_cast<uint8_t>(0x10 | (code[slot * kSlotBytes + 1] & 0x0f));
            nf.map_table[slot] = name;
        }
    }

    // every wide load must have been claimed by a relocation by now
    for (size_t slot = 0; slot * kSlotBytes < code.size(); ++slot) {
        if (code[slot * kSlotBytes] == 0x18) {
            if (!nf.map_table.count(slot))
                fail(errc::unresolved_map_relocation,
                     "wide load at slot " + std::to_string(slot) + " has no relocation");
            ++slot;
        }
    }

    nf.instructions = decode_program(code);
    nf.nf_id = sections[prog_index].name;
    nf.hook = hook_override.value_or(infer_hook(nf.nf_id));
    return nf;
}

} // namespace prashna
