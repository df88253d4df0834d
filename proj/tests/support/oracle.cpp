// SPDX-License-Identifier: MIT
#include "support/oracle.hpp"

#include <map>
#include <set>
#include <vector>

#include "prashna/cfg.hpp"
#include "prashna/errors.hpp"

namespace prashna::testsupport {

namespace {

// Register contents, re-modelled from scratch: a kind letter instead of an
// enum, plus the numeric payload and the field name the value was read from.
struct OCell {
    char kind = 'u'; // u unknown, c const, b ctx buffer, p data, e data end, f frame, m map
    long long num = 0;
    bool has_num = false;
    std::string src;
};

struct OPair {
    std::string field;
    long long value = 0;
    bool negated = false;
    bool operator==(const OPair& o) const {
        return field == o.field && value == o.value && negated == o.negated;
    }
};

struct OMachine {
    OCell reg[11];
    // frame-relative start byte -> (width, stored cell)
    std::map<long long, std::pair<int, OCell>> frame;
    std::string proto;
    long long base = 0;
    std::vector<std::pair<std::string, long long>> chain;
    std::string pending;
    std::vector<OPair> pairs;
    bool saw_entry = false;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\\\"";
        else if (c == '\\')
            out += "\\\\";
        else if (c == '\n')
            out += "\\n";
        else
            out.push_back(c);
    }
    out.push_back('"');
    return out;
}

class Interp {
  public:
    Interp(const NfObject& nf, const NetSpec& spec) : nf_(nf), spec_(spec) {
        cfg_ = build_cfg(nf.instructions);
        buffer_ = spec.hooks.at(nf.hook).buffer;
        initial_proto_ = spec.hooks.at(nf.hook).initial_proto;
    }

    std::string run() {
        for (const BasicBlock& b : cfg_.blocks)
            for (const std::string& succ : b.successors)
                lines_.insert("edge(" + quote(b.id) + "," + quote(succ) + ").");
        OMachine m;
        m.reg[1].kind = 'b';
        m.reg[10] = OCell{'f', 0, true, ""};
        m.proto = initial_proto_;
        m.chain.emplace_back(initial_proto_, 0);
        std::vector<std::string> trail;
        walk(cfg_.index_of(cfg_.entry), m, trail);
        std::string out;
        for (const std::string& line : lines_) {
            out += line;
            out.push_back('\n');
        }
        return out;
    }

  private:
    void record(const std::string& block, const std::string& pred, const std::string& a) {
        lines_.insert(pred + "(" + quote(nf_.nf_id) + "," + quote(block) + "," + quote(a) + ").");
    }
    void record(const std::string& block, const std::string& pred, const std::string& a,
                const std::string& b) {
        lines_.insert(pred + "(" + quote(nf_.nf_id) + "," + quote(block) + "," + quote(a) + "," +
                      quote(b) + ").");
    }

    std::string header_field(const std::string& proto, long long rel) const {
        auto pit = spec_.protocols.find(proto);
        if (pit != spec_.protocols.end())
            for (const auto& [off, f] : pit->second.fields)
                if (rel >= off && rel < off + f.width)
                    return proto + "." + f.name;
        return proto + ".unknown@" + std::to_string(rel);
    }

    std::string buffer_field(long long off) const {
        auto bit = spec_.buffers.find(buffer_);
        if (bit != spec_.buffers.end()) {
            auto fit = bit->second.fields.find(static_cast<int>(off));
            if (fit != bit->second.fields.end())
                return buffer_ + "." + fit->second;
        }
        return buffer_ + ".unknown@" + std::to_string(off);
    }

    // "", "data" or "data_end"
    std::string buffer_kind(long long off) const {
        auto bit = spec_.buffers.find(buffer_);
        if (bit == spec_.buffers.end())
            return "";
        auto fit = bit->second.fields.find(static_cast<int>(off));
        if (fit == bit->second.fields.end())
            return "";
        if (fit->second == bit->second.data_field)
            return "data";
        if (fit->second == bit->second.data_end_field)
            return "data_end";
        return "";
    }

    int proto_len(const std::string& proto) const { return spec_.protocols.at(proto).header_len; }

    std::string resolve(const OMachine& m, long long abs) const {
        for (auto it = m.chain.rbegin(); it != m.chain.rend(); ++it)
            if (abs >= it->second)
                return header_field(it->first, abs - it->second);
        return header_field(m.chain.front().first, abs - m.chain.front().second);
    }

    void commit(OMachine& m, const std::string& block) {
        m.base += proto_len(m.proto);
        m.proto = m.pending;
        m.pending.clear();
        m.chain.emplace_back(m.proto, m.base);
        record(block, "protocol_accessed", m.proto);
    }

    void commit_if_past_end(OMachine& m, long long abs, const std::string& block) {
        if (!m.pending.empty() && abs >= m.base + proto_len(m.proto))
            commit(m, block);
    }

    std::string map_of(const OCell& c) const {
        if (!c.has_num)
            return "unknown";
        auto it = nf_.map_table.find(static_cast<size_t>(c.num));
        return it == nf_.map_table.end() ? "unknown" : it->second;
    }

    std::string source_of(const OMachine& m, const OCell& c) const {
        if (c.kind == 'f' && c.has_num) {
            if (c.num >= -512 && c.num < 0) {
                auto it = m.frame.find(c.num);
                if (it != m.frame.end() && !it->second.second.src.empty())
                    return it->second.second.src;
            }
            return "unknown";
        }
        if (c.kind == 'p' && c.has_num)
            return resolve(m, c.num);
        if (!c.src.empty())
            return c.src;
        return "unknown";
    }

    void add_pair(OMachine& m, OPair p) {
        for (const OPair& e : m.pairs)
            if (e == p)
                return;
        m.pairs.push_back(std::move(p));
    }

    void frame_store(OMachine& m, long long at, int width, const OCell& cell, size_t slot) {
        if (at < -512 || at + width > 0)
            fail(errc::stack_out_of_range, "reference store at frame byte " + std::to_string(at) +
                                               " width " + std::to_string(width) + " at slot " +
                                               std::to_string(slot));
        for (auto it = m.frame.begin(); it != m.frame.end();) {
            long long start = it->first;
            long long end = start + it->second.first;
            if (start < at + width && end > at)
                it = m.frame.erase(it);
            else
                ++it;
        }
        m.frame[at] = {width, cell};
    }

    OCell frame_load(const OMachine& m, long long at, int width) const {
        if (at < -512 || at + width > 0)
            return OCell{};
        auto it = m.frame.find(at);
        if (it != m.frame.end() && it->second.first == width)
            return it->second.second;
        return OCell{};
    }

    static void put(OMachine& m, uint8_t reg, const OCell& c) {
        if (reg != 10)
            m.reg[reg] = c;
    }

    static OCell cval(long long v) { return OCell{'c', v, true, ""}; }

    static bool folds(uint8_t aop, bool wide, long long a, long long b, long long& out) {
        uint64_t ua = static_cast<uint64_t>(a);
        uint64_t ub = static_cast<uint64_t>(b);
        uint64_t r;
        switch (aop) {
        case 0x00: r = ua + ub; break;
        case 0x10: r = ua - ub; break;
        case 0x20: r = ua * ub; break;
        case 0x30:
            if (ub == 0)
                return false;
            r = ua / ub;
            break;
        case 0x90:
            if (ub == 0)
                return false;
            r = ua % ub;
            break;
        case 0x40: r = ua | ub; break;
        case 0x50: r = ua & ub; break;
        case 0xa0: r = ua ^ ub; break;
        case 0x60: r = ua << (ub & 63); break;
        case 0x70: r = ua >> (ub & 63); break;
        case 0xc0: r = static_cast<uint64_t>(a >> (ub & 63)); break;
        default: return false;
        }
        if (!wide)
            r = static_cast<uint32_t>(r);
        out = static_cast<long long>(r);
        return true;
    }

    void exec(OMachine& m, size_t pos, const std::string& block) {
        const Instruction& insn = nf_.instructions[pos];
        const uint8_t op = insn.opcode;
        const uint8_t cls = op & 0x07;

        if (op == 0x18) { // wide immediate load carrying a map reference
            put(m, insn.dst_reg, OCell{'m', static_cast<long long>(insn.index), true, ""});
            return;
        }
        if (cls == 0x03 && (op & 0xe0) == 0xc0) { // atomic
            put(m, insn.dst_reg, OCell{});
            return;
        }
        if (cls == 0x04 || cls == 0x07) {
            exec_alu(m, insn);
            return;
        }
        if (cls == 0x05 || cls == 0x06) {
            if (op == 0x85)
                exec_call(m, insn, block);
            return; // jump effects belong to edges; exit is handled by the walker
        }
        if (cls == 0x01 && (op & 0xe0) == 0x60) {
            exec_load(m, insn, pos, block);
            return;
        }
        if ((cls == 0x02 || cls == 0x03) && (op & 0xe0) == 0x60)
            exec_store(m, insn, block);
    }

    void exec_alu(OMachine& m, const Instruction& insn) {
        const uint8_t op = insn.opcode;
        const uint8_t aop = op & 0xf0;
        const bool wide = (op & 0x07) == 0x07;
        const bool from_imm = (op & 0x08) == 0;

        if (aop == 0xb0) { // mov
            if (from_imm) {
                long long v = wide ? static_cast<long long>(insn.imm)
                                   : static_cast<long long>(static_cast<uint32_t>(insn.imm));
                put(m, insn.dst_reg, cval(v));
            } else if (wide) {
                put(m, insn.dst_reg, m.reg[insn.src_reg]);
            } else {
                const OCell& s = m.reg[insn.src_reg];
                if (s.kind == 'c' && s.has_num)
                    put(m, insn.dst_reg,
                        cval(static_cast<long long>(static_cast<uint32_t>(s.num))));
                else
                    put(m, insn.dst_reg, OCell{});
            }
            return;
        }
        if (aop == 0x80) { // negate keeps full width in both classes
            const OCell& d = m.reg[insn.dst_reg];
            if (d.kind == 'c' && d.has_num)
                put(m, insn.dst_reg,
                    cval(static_cast<long long>(0 - static_cast<uint64_t>(d.num))));
            else
                put(m, insn.dst_reg, OCell{});
            return;
        }
        if (aop == 0xd0) { // byte swap
            put(m, insn.dst_reg, OCell{});
            return;
        }
        OCell operand = from_imm ? cval(insn.imm) : m.reg[insn.src_reg];
        const OCell d = m.reg[insn.dst_reg];
        OCell out;
        long long folded;
        if (d.kind == 'c' && operand.kind == 'c' && d.has_num && operand.has_num &&
            folds(aop, wide, d.num, operand.num, folded)) {
            out = cval(folded);
        } else if (wide && (aop == 0x00 || aop == 0x10) && (d.kind == 'p' || d.kind == 'f') &&
                   operand.kind == 'c' && d.has_num && operand.has_num) {
            out.kind = d.kind;
            out.has_num = true;
            out.num = aop == 0x00 ? d.num + operand.num : d.num - operand.num;
        } else if (wide && aop == 0x00 && d.kind == 'c' &&
                   (operand.kind == 'p' || operand.kind == 'f') && d.has_num && operand.has_num) {
            out.kind = operand.kind;
            out.has_num = true;
            out.num = d.num + operand.num;
        } else if (wide && (aop == 0x00 || aop == 0x10) && d.kind == 'm' && operand.kind == 'c') {
            out.kind = 'm';
            out.num = d.num;
            out.has_num = d.has_num;
        }
        put(m, insn.dst_reg, out);
    }

    static int load_width(uint8_t op) {
        switch (op & 0x18) {
        case 0x00: return 4;
        case 0x08: return 2;
        case 0x10: return 1;
        default: return 8;
        }
    }

    bool fused(size_t pos, const std::string& field) const {
        if (pos + 1 >= nf_.instructions.size())
            return false;
        const Instruction& n = nf_.instructions[pos + 1];
        const uint8_t cls = n.opcode & 0x07;
        if (cls != 0x05 && cls != 0x06)
            return false;
        const uint8_t jop = n.opcode & 0xf0;
        if (n.opcode == 0x05 || n.opcode == 0x85 || n.opcode == 0x95)
            return false;
        if (jop != 0x10 && jop != 0x50)
            return false;
        if ((n.opcode & 0x08) != 0)
            return false;
        if (n.dst_reg != nf_.instructions[pos].dst_reg)
            return false;
        auto dot = field.find('.');
        if (dot == std::string::npos)
            return false;
        auto pit = spec_.protocols.find(field.substr(0, dot));
        return pit != spec_.protocols.end() &&
               pit->second.tail_fields.count(field.substr(dot + 1)) != 0;
    }

    void exec_load(OMachine& m, const Instruction& insn, size_t pos, const std::string& block) {
        const OCell s = m.reg[insn.src_reg];
        OCell out;
        if (s.kind == 'b') {
            std::string field = buffer_field(insn.offset);
            record(block, "read_buffer_field", field);
            std::string role = buffer_kind(insn.offset);
            if (role == "data") {
                out = OCell{'p', 0, true, ""};
                if (!m.saw_entry) {
                    m.saw_entry = true;
                    record(block, "protocol_accessed", m.proto);
                }
            } else if (role == "data_end") {
                out.kind = 'e';
            } else {
                out.src = field;
            }
        } else if (s.kind == 'p') {
            long long abs = s.num + insn.offset;
            commit_if_past_end(m, abs, block);
            std::string field = resolve(m, abs);
            if (!fused(pos, field))
                record(block, "read_header_field", field);
            out.src = field;
        } else if (s.kind == 'f') {
            out = frame_load(m, s.num + insn.offset, load_width(insn.opcode));
        } else if (s.kind == 'm') {
            out = OCell{'m', s.num, s.has_num, ""};
        }
        put(m, insn.dst_reg, out);
    }

    void exec_store(OMachine& m, const Instruction& insn, const std::string& block) {
        const bool reg_form = (insn.opcode & 0x07) == 0x03;
        OCell value = reg_form ? m.reg[insn.src_reg] : cval(insn.imm);
        const OCell d = m.reg[insn.dst_reg];
        if (d.kind == 'b') {
            std::string field = buffer_field(insn.offset);
            record(block, "write_buffer_field", field);
            if (value.kind == 'c' && value.has_num)
                add_pair(m, OPair{field, value.num, false});
        } else if (d.kind == 'p') {
            long long abs = d.num + insn.offset;
            commit_if_past_end(m, abs, block);
            std::string field = resolve(m, abs);
            record(block, "write_header_field", field);
            if (value.kind == 'c' && value.has_num)
                add_pair(m, OPair{field, value.num, false});
        } else if (d.kind == 'f') {
            frame_store(m, d.num + insn.offset, load_width(insn.opcode), value, insn.index);
        }
    }

    void exec_call(OMachine& m, const Instruction& insn, const std::string& block) {
        long long id = insn.imm;
        auto hit = spec_.helpers.find(id);
        record(block, "invoke_helper",
               hit == spec_.helpers.end() ? "unknown@" + std::to_string(id) : hit->second);
        const OCell r1 = m.reg[1];
        const OCell r2 = m.reg[2];
        const OCell r3 = m.reg[3];
        if (r1.kind == 'm') {
            if (id == 1)
                record(block, "read_from_map", map_of(r1));
            if (id == 2)
                record(block, "write_into_map", map_of(r1), source_of(m, r3));
            if ((id == 1 || id == 2 || id == 3 || id == 51) && r2.kind == 'm')
                record(block, "correlated_maps", map_of(r2), map_of(r1));
        }
        m.reg[0] = id == 1 && r1.kind == 'm' ? OCell{'m', r1.num, r1.has_num, ""} : OCell{};
        for (int r = 1; r <= 5; ++r)
            m.reg[r] = OCell{};
    }

    void branch_effect(OMachine& m, const Instruction& insn, bool taken,
                       const std::string& to_block) {
        const uint8_t jop = insn.opcode & 0xf0;
        if ((insn.opcode & 0x08) == 0) {
            if (jop != 0x10 && jop != 0x50) // only equality tests carry information
                return;
            const OCell& cell = m.reg[insn.dst_reg];
            if (cell.src.empty())
                return;
            const bool eq_edge = (jop == 0x10) == taken;
            if (!eq_edge) {
                add_pair(m, OPair{cell.src, insn.imm, true});
                return;
            }
            add_pair(m, OPair{cell.src, insn.imm, false});
            auto dot = cell.src.find('.');
            if (dot == std::string::npos)
                return;
            auto pit = spec_.protocols.find(cell.src.substr(0, dot));
            if (pit == spec_.protocols.end())
                return;
            auto fit = pit->second.tail_fields.find(cell.src.substr(dot + 1));
            if (fit == pit->second.tail_fields.end())
                return;
            auto vit = fit->second.find(insn.imm);
            if (vit != fit->second.end())
                m.pending = vit->second;
            return;
        }
        const OCell& a = m.reg[insn.dst_reg];
        const OCell& b = m.reg[insn.src_reg];
        bool p_lhs;
        if (a.kind == 'p' && b.kind == 'e')
            p_lhs = true;
        else if (a.kind == 'e' && b.kind == 'p')
            p_lhs = false;
        else
            return;
        bool in_bounds;
        if (jop == 0x20 || jop == 0x30 || jop == 0x60 || jop == 0x70)
            in_bounds = p_lhs ? !taken : taken;
        else if (jop == 0xa0 || jop == 0xb0 || jop == 0xc0 || jop == 0xd0)
            in_bounds = p_lhs ? taken : !taken;
        else
            return;
        if (in_bounds && !m.pending.empty())
            commit(m, to_block);
    }

    void walk(size_t block_idx, OMachine m, std::vector<std::string> trail) {
        const BasicBlock& b = cfg_.blocks[block_idx];
        trail.push_back(b.id);
        for (size_t pos = b.first; pos <= b.last; ++pos)
            exec(m, pos, b.id);
        if (b.successors.empty()) {
            finish(m, trail);
            return;
        }
        const Instruction& tail = nf_.instructions[b.last];
        const uint8_t cls = tail.opcode & 0x07;
        const bool cond = (cls == 0x05 || cls == 0x06) && tail.opcode != 0x05 &&
                          tail.opcode != 0x85 && tail.opcode != 0x95;
        if (cond && b.successors.size() == 2) {
            for (size_t k = 0; k < 2; ++k) {
                OMachine copy = m;
                branch_effect(copy, tail, k == 0, b.successors[k]);
                walk(cfg_.index_of(b.successors[k]), std::move(copy), trail);
            }
        } else {
            for (const std::string& succ : b.successors)
                walk(cfg_.index_of(succ), m, trail);
        }
    }

    void finish(const OMachine& m, const std::vector<std::string>& trail) {
        std::string action = "unknown";
        if (m.reg[0].kind == 'c' && m.reg[0].has_num) {
            auto hit = spec_.actions.find(nf_.hook);
            if (hit != spec_.actions.end()) {
                auto ait = hit->second.find(m.reg[0].num);
                if (ait != hit->second.end())
                    action = ait->second;
            }
        }
        std::string ctx = "[[";
        for (size_t i = 0; i < m.pairs.size(); ++i) {
            if (i)
                ctx.push_back(',');
            ctx += "(" + quote(m.pairs[i].field) + ",";
            if (m.pairs[i].negated)
                ctx.push_back('!');
            ctx += std::to_string(m.pairs[i].value) + ")";
        }
        ctx += "],[";
        for (size_t i = 0; i < trail.size(); ++i) {
            if (i)
                ctx.push_back(',');
            ctx += quote(trail[i]);
        }
        ctx += "]]";
        lines_.insert("return_action(" + quote(nf_.nf_id) + "," + quote(nf_.hook) + "," +
                      quote(action) + "," + ctx + ").");
    }

    const NfObject& nf_;
    const NetSpec& spec_;
    Cfg cfg_;
    std::string buffer_;
    std::string initial_proto_;
    std::set<std::string> lines_;
};

} // namespace

std::string reference_kb_text(const NfObject& nf, const NetSpec& spec) {
    return Interp(nf, spec).run();
}

} // namespace prashna::testsupport
