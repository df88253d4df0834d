// SPDX-License-Identifier: MIT
#include "prashna/analyzer.hpp"

#include <sstream>

#include "json.hpp"

#include "prashna/errors.hpp"

namespace prashna {

namespace {

using ojson = nlohmann::ordered_json;

TaggedCell unknown_cell() { return TaggedCell{}; }

TaggedCell const_cell(int64_t v) { return TaggedCell{ValueTag::constant, v, std::nullopt}; }

std::pair<std::string, std::string> split_field(const std::string& qualified) {
    auto dot = qualified.find('.');
    if (dot == std::string::npos)
        return {qualified, ""};
    return {qualified.substr(0, dot), qualified.substr(dot + 1)};
}

ContextItem item1(ContextItem::Kind kind, std::string a) {
    return ContextItem{kind, std::move(a), ""};
}

ContextItem item2(ContextItem::Kind kind, std::string a, std::string b) {
    return ContextItem{kind, std::move(a), std::move(b)};
}

std::string resolve_field(const AbstractState& st, const NetSpec& spec, int64_t abs) {
    for (auto it = st.committed.rbegin(); it != st.committed.rend(); ++it)
        if (abs >= it->second)
            return spec.hdr_field_name(it->first, abs - it->second);
    const auto& front = st.committed.front();
    return spec.hdr_field_name(front.first, abs - front.second);
}

void commit_next(AbstractState& st, const NetSpec& spec, std::vector<ContextItem>& items) {
    st.proto_base += spec.header_len(st.curr_proto);
    st.curr_proto = *st.next_proto;
    st.next_proto.reset();
    st.committed.emplace_back(st.curr_proto, st.proto_base);
    items.push_back(item1(ContextItem::Kind::protocol_accessed, st.curr_proto));
}

// A pending successor protocol becomes current once an access reaches past
// the end of the committed chain.
void maybe_commit(AbstractState& st, const NetSpec& spec, int64_t abs,
                  std::vector<ContextItem>& items) {
    if (st.next_proto && abs >= st.proto_base + spec.header_len(st.curr_proto))
        commit_next(st, spec, items);
}

std::string map_name(const NfObject& nf, const TaggedCell& cell) {
    if (!cell.value)
        return "unknown";
    auto it = nf.map_table.find(static_cast<size_t>(*cell.value));
    return it == nf.map_table.end() ? "unknown" : it->second;
}

void clear_extent(AbstractState& st, int idx) {
    StackSlot& s = st.stack[static_cast<size_t>(idx)];
    int start = idx;
    if (s.state == StackSlot::State::cover)
        start = s.owner;
    else if (s.state != StackSlot::State::base)
        return;
    int width = st.stack[static_cast<size_t>(start)].width;
    for (int k = start; k < start + width && k < kStackBytes; ++k)
        st.stack[static_cast<size_t>(k)] = StackSlot{};
}

void stack_write(AbstractState& st, int64_t idx, int width, const TaggedCell& cell,
                 size_t slot_index) {
    if (idx < 0 || idx + width > kStackBytes)
        fail(errc::stack_out_of_range, "store at frame byte " + std::to_string(idx - kStackBytes) +
                                           " width " + std::to_string(width) + " at slot " +
                                           std::to_string(slot_index));
    for (int k = 0; k < width; ++k)
        clear_extent(st, static_cast<int>(idx) + k);
    StackSlot& base = st.stack[static_cast<size_t>(idx)];
    base.state = StackSlot::State::base;
    base.cell = cell;
    base.width = width;
    for (int k = 1; k < width; ++k) {
        StackSlot& cover = st.stack[static_cast<size_t>(idx + k)];
        cover.state = StackSlot::State::cover;
        cover.owner = static_cast<int>(idx);
    }
}

TaggedCell stack_read(const AbstractState& st, int64_t idx, int width) {
    if (idx < 0 || idx + width > kStackBytes)
        return unknown_cell();
    const StackSlot& s = st.stack[static_cast<size_t>(idx)];
    if (s.state == StackSlot::State::base && s.width == width)
        return s.cell;
    return unknown_cell();
}

// Field a helper's value argument points at, for recording what flows into a
// map: a spilled cell's origin, a direct packet offset, or a register that
// still remembers what it was loaded from.
std::string value_field(const AbstractState& st, const NetSpec& spec, const TaggedCell& cell) {
    if (cell.tag == ValueTag::stack_frame && cell.value) {
        int64_t idx = kStackBytes + *cell.value;
        if (idx >= 0 && idx < kStackBytes) {
            const StackSlot& s = st.stack[static_cast<size_t>(idx)];
            if (s.state == StackSlot::State::base && s.cell.field)
                return *s.cell.field;
        }
        return "unknown";
    }
    if (cell.tag == ValueTag::pkt_data_start && cell.value)
        return resolve_field(st, spec, *cell.value);
    if (cell.field)
        return *cell.field;
    return "unknown";
}

void add_pair(AbstractState& st, PathPair pair) {
    for (const PathPair& existing : st.pairs)
        if (existing == pair)
            return;
    st.pairs.push_back(std::move(pair));
}

std::optional<int64_t> eval_binary(AluOp op, int64_t a, int64_t b) {
    switch (op) {
    case AluOp::add: return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
    case AluOp::sub: return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
    case AluOp::mul: return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
    case AluOp::div: return b == 0 ? std::nullopt : std::optional<int64_t>(
                                static_cast<int64_t>(static_cast<uint64_t>(a) / static_cast<uint64_t>(b)));
    case AluOp::mod: return b == 0 ? std::nullopt : std::optional<int64_t>(
                                static_cast<int64_t>(static_cast<uint64_t>(a) % static_cast<uint64_t>(b)));
    case AluOp::or_: return a | b;
    case AluOp::and_: return a & b;
    case AluOp::xor_: return a ^ b;
    case AluOp::lsh: return static_cast<int64_t>(static_cast<uint64_t>(a) << (b & 63));
    case AluOp::rsh: return static_cast<int64_t>(static_cast<uint64_t>(a) >> (b & 63));
    case AluOp::arsh: return a >> (b & 63);
    default: return std::nullopt;
    }
}

bool is_tail_field(const NetSpec& spec, const std::string& qualified) {
    auto [owner, shortname] = split_field(qualified);
    return !shortname.empty() && spec.is_tail_field(owner, shortname);
}

// True when `load` feeds the immediately following equality test, making the
// pair one fused next-protocol dispatch rather than a content read.
bool fused_dispatch(const NetSpec& spec, const Instruction& load, const Instruction* next,
                    const std::string& field) {
    if (next == nullptr || next->kind != InsnKind::jump_cond || !is_imm_form(next->opcode))
        return false;
    JmpOp op = jmp_op(next->opcode);
    if (op != JmpOp::jeq && op != JmpOp::jne)
        return false;
    return next->dst_reg == load.dst_reg && is_tail_field(spec, field);
}

void set_reg(AbstractState& st, uint8_t reg, const TaggedCell& cell) {
    if (reg != 10) // the frame pointer is read-only
        st.reg[reg] = cell;
}

} // namespace

const char* context_kind_name(ContextItem::Kind kind) {
    switch (kind) {
    case ContextItem::Kind::read_buffer_field: return "read_buffer_field";
    case ContextItem::Kind::read_header_field: return "read_header_field";
    case ContextItem::Kind::write_buffer_field: return "write_buffer_field";
    case ContextItem::Kind::write_header_field: return "write_header_field";
    case ContextItem::Kind::read_from_map: return "read_from_map";
    case ContextItem::Kind::write_into_map: return "write_into_map";
    case ContextItem::Kind::correlated_maps: return "correlated_maps";
    case ContextItem::Kind::invoke_helper: return "invoke_helper";
    case ContextItem::Kind::protocol_accessed: return "protocol_accessed";
    }
    return "unknown";
}

AbstractState init_state(const NfObject& nf, const NetSpec& spec) {
    const HookSpec& hook = spec.hook(nf.hook);
    AbstractState st;
    st.reg[1] = TaggedCell{ValueTag::pkt_buff, std::nullopt, std::nullopt};
    st.reg[10] = TaggedCell{ValueTag::stack_frame, 0, std::nullopt};
    st.curr_proto = hook.initial_proto;
    st.proto_base = 0;
    st.committed.emplace_back(st.curr_proto, 0);
    return st;
}

std::vector<ContextItem> step(AbstractState& st, const Instruction& insn,
                              const Instruction* next_insn, const NfObject& nf,
                              const NetSpec& spec) {
    std::vector<ContextItem> items;
    const std::string& buffer = spec.hook(nf.hook).buffer;

    switch (insn.kind) {
    case InsnKind::mov: {
        const bool wide_class = (insn.opcode & 0x07) == 0x07;
        if (is_imm_form(insn.opcode)) {
            int64_t v = wide_class ? static_cast<int64_t>(insn.imm)
                                   : static_cast<int64_t>(static_cast<uint32_t>(insn.imm));
            set_reg(st, insn.dst_reg, const_cell(v));
        } else if (wide_class) {
            set_reg(st, insn.dst_reg, st.reg[insn.src_reg]);
        } else {
            const TaggedCell& src = st.reg[insn.src_reg];
            if (src.tag == ValueTag::constant && src.value)
                set_reg(st, insn.dst_reg,
                        const_cell(static_cast<int64_t>(static_cast<uint32_t>(*src.value))));
            else
                set_reg(st, insn.dst_reg, unknown_cell());
        }
        break;
    }
    case InsnKind::alu: {
        AluOp op = alu_op(insn.opcode);
        if (op == AluOp::atomic) {
            set_reg(st, insn.dst_reg, unknown_cell());
            break;
        }
        if (op == AluOp::neg) {
            TaggedCell& dst = st.reg[insn.dst_reg];
            TaggedCell out = dst.tag == ValueTag::constant && dst.value
                                 ? const_cell(static_cast<int64_t>(0 - static_cast<uint64_t>(*dst.value)))
                                 : unknown_cell();
            set_reg(st, insn.dst_reg, out);
            break;
        }
        if (op == AluOp::swap) {
            set_reg(st, insn.dst_reg, unknown_cell());
            break;
        }
        const bool wide_class = (insn.opcode & 0x07) == 0x07;
        TaggedCell operand = is_imm_form(insn.opcode) ? const_cell(insn.imm)
                                                      : st.reg[insn.src_reg];
        const TaggedCell dst = st.reg[insn.dst_reg];
        TaggedCell out = unknown_cell();
        if (dst.tag == ValueTag::constant && operand.tag == ValueTag::constant && dst.value &&
            operand.value) {
            if (auto v = eval_binary(op, *dst.value, *operand.value)) {
                int64_t result = *v;
                if (!wide_class)
                    result = static_cast<int64_t>(static_cast<uint32_t>(result));
                out = const_cell(result);
            }
        } else if (wide_class && (op == AluOp::add || op == AluOp::sub) &&
                   (dst.tag == ValueTag::pkt_data_start || dst.tag == ValueTag::stack_frame) &&
                   operand.tag == ValueTag::constant && dst.value && operand.value) {
            out.tag = dst.tag;
            out.value = op == AluOp::add ? *dst.value + *operand.value
                                         : *dst.value - *operand.value;
        } else if (wide_class && op == AluOp::add && dst.tag == ValueTag::constant &&
                   (operand.tag == ValueTag::pkt_data_start ||
                    operand.tag == ValueTag::stack_frame) &&
                   dst.value && operand.value) {
            out.tag = operand.tag;
            out.value = *dst.value + *operand.value;
        } else if (wide_class && (op == AluOp::add || op == AluOp::sub) &&
                   dst.tag == ValueTag::ref_map && operand.tag == ValueTag::constant) {
            out.tag = ValueTag::ref_map; // still points into the same map value
            out.value = dst.value;
        }
        set_reg(st, insn.dst_reg, out);
        break;
    }
    case InsnKind::load_mem: {
        const TaggedCell src = st.reg[insn.src_reg];
        TaggedCell out = unknown_cell();
        switch (src.tag) {
        case ValueTag::pkt_buff: {
            std::string field = spec.buff_field_name(buffer, insn.offset);
            items.push_back(item1(ContextItem::Kind::read_buffer_field, field));
            BufferRole role = spec.buffer_role(buffer, insn.offset);
            if (role == BufferRole::data) {
                out = TaggedCell{ValueTag::pkt_data_start, 0, std::nullopt};
                if (!st.entry_proto_recorded) {
                    st.entry_proto_recorded = true;
                    items.push_back(item1(ContextItem::Kind::protocol_accessed, st.curr_proto));
                }
            } else if (role == BufferRole::data_end) {
                out = TaggedCell{ValueTag::pkt_data_end, std::nullopt, std::nullopt};
            } else {
                out.field = field;
            }
            break;
        }
        case ValueTag::pkt_data_start: {
            int64_t abs = *src.value + insn.offset;
            maybe_commit(st, spec, abs, items);
            std::string field = resolve_field(st, spec, abs);
            if (!fused_dispatch(spec, insn, next_insn, field))
                items.push_back(item1(ContextItem::Kind::read_header_field, field));
            out.field = field;
            break;
        }
        case ValueTag::stack_frame:
            out = stack_read(st, kStackBytes + *src.value + insn.offset, mem_width(insn.opcode));
            break;
        case ValueTag::ref_map:
            out = TaggedCell{ValueTag::ref_map, src.value, std::nullopt};
            break;
        default:
            break;
        }
        set_reg(st, insn.dst_reg, out);
        break;
    }
    case InsnKind::store_mem: {
        const bool reg_form = (insn.opcode & 0x07) == 0x03;
        TaggedCell value = reg_form ? st.reg[insn.src_reg] : const_cell(insn.imm);
        const TaggedCell dst = st.reg[insn.dst_reg];
        switch (dst.tag) {
        case ValueTag::pkt_buff: {
            std::string field = spec.buff_field_name(buffer, insn.offset);
            items.push_back(item1(ContextItem::Kind::write_buffer_field, field));
            if (value.tag == ValueTag::constant && value.value)
                add_pair(st, PathPair{field, *value.value, false});
            break;
        }
        case ValueTag::pkt_data_start: {
            int64_t abs = *dst.value + insn.offset;
            maybe_commit(st, spec, abs, items);
            std::string field = resolve_field(st, spec, abs);
            items.push_back(item1(ContextItem::Kind::write_header_field, field));
            if (value.tag == ValueTag::constant && value.value)
                add_pair(st, PathPair{field, *value.value, false});
            break;
        }
        case ValueTag::stack_frame:
            stack_write(st, kStackBytes + *dst.value + insn.offset, mem_width(insn.opcode), value,
                        insn.index);
            break;
        default:
            break;
        }
        break;
    }
    case InsnKind::load_map_fd:
        set_reg(st, insn.dst_reg,
                TaggedCell{ValueTag::ref_map, static_cast<int64_t>(insn.index), std::nullopt});
        break;
    case InsnKind::call: {
        const int64_t id = insn.imm;
        items.push_back(item1(ContextItem::Kind::invoke_helper, spec.helper_name(id)));
        const TaggedCell r1 = st.reg[1];
        const TaggedCell r2 = st.reg[2];
        const TaggedCell r3 = st.reg[3];
        if (r1.tag == ValueTag::ref_map) {
            if (id == 1)
                items.push_back(item1(ContextItem::Kind::read_from_map, map_name(nf, r1)));
            if (id == 2)
                items.push_back(item2(ContextItem::Kind::write_into_map, map_name(nf, r1),
                                      value_field(st, spec, r3)));
            if ((id == 1 || id == 2 || id == 3 || id == 51) && r2.tag == ValueTag::ref_map)
                items.push_back(item2(ContextItem::Kind::correlated_maps, map_name(nf, r2),
                                      map_name(nf, r1)));
        }
        TaggedCell ret = unknown_cell();
        if (id == 1 && r1.tag == ValueTag::ref_map)
            ret = TaggedCell{ValueTag::ref_map, r1.value, std::nullopt};
        st.reg[0] = ret;
        for (int r = 1; r <= 5; ++r)
            st.reg[static_cast<size_t>(r)] = unknown_cell();
        break;
    }
    case InsnKind::jump_cond:
    case InsnKind::jump_uncond:
    case InsnKind::exit_prog:
        break;
    }
    return items;
}

std::vector<ContextItem> apply_branch(AbstractState& st, const Instruction& insn, bool taken,
                                      const NfObject& nf, const NetSpec& spec) {
    (void)nf;
    std::vector<ContextItem> items;
    if (insn.kind != InsnKind::jump_cond)
        return items;
    JmpOp op = jmp_op(insn.opcode);
    if (is_imm_form(insn.opcode)) {
        if (op != JmpOp::jeq && op != JmpOp::jne)
            return items;
        const TaggedCell& cell = st.reg[insn.dst_reg];
        if (!cell.field)
            return items;
        const bool eq_edge = (op == JmpOp::jeq) == taken;
        if (eq_edge) {
            add_pair(st, PathPair{*cell.field, insn.imm, false});
            auto [owner, shortname] = split_field(*cell.field);
            if (!shortname.empty())
                if (auto next = spec.next_proto(owner, shortname, insn.imm))
                    st.next_proto = next;
        } else {
            add_pair(st, PathPair{*cell.field, insn.imm, true});
        }
        return items;
    }
    const TaggedCell& a = st.reg[insn.dst_reg];
    const TaggedCell& b = st.reg[insn.src_reg];
    bool p_is_lhs;
    if (a.tag == ValueTag::pkt_data_start && b.tag == ValueTag::pkt_data_end)
        p_is_lhs = true;
    else if (a.tag == ValueTag::pkt_data_end && b.tag == ValueTag::pkt_data_start)
        p_is_lhs = false;
    else
        return items;
    bool in_bounds_edge;
    switch (op) {
    case JmpOp::jgt:
    case JmpOp::jge:
    case JmpOp::jsgt:
    case JmpOp::jsge:
        in_bounds_edge = p_is_lhs ? !taken : taken;
        break;
    case JmpOp::jlt:
    case JmpOp::jle:
    case JmpOp::jslt:
    case JmpOp::jsle:
        in_bounds_edge = p_is_lhs ? taken : !taken;
        break;
    default:
        return items;
    }
    if (in_bounds_edge && st.next_proto)
        commit_next(st, spec, items);
    return items;
}

CfgNc analyze_nf(const NfObject& nf, const NetSpec& spec) {
    return analyze_nf(nf, spec, default_path_budget());
}

CfgNc analyze_nf(const NfObject& nf, const NetSpec& spec, uint64_t path_budget) {
    CfgNc res;
    res.cfg = build_cfg(nf.instructions);
    spec.hook(nf.hook); // validates the hook before walking

    std::map<std::string, size_t> index;
    for (size_t i = 0; i < res.cfg.blocks.size(); ++i)
        index[res.cfg.blocks[i].id] = i;
    for (const BasicBlock& b : res.cfg.blocks)
        res.block_ctx[b.id];

    PathStream paths(res.cfg, path_budget);
    while (auto path = paths.next()) {
        AbstractState st = init_state(nf, spec);
        for (size_t k = 0; k < path->size(); ++k) {
            const BasicBlock& b = res.cfg.blocks[index.at((*path)[k])];
            for (size_t pos = b.first; pos <= b.last; ++pos) {
                const Instruction& insn = nf.instructions[pos];
                const Instruction* next =
                    pos + 1 < nf.instructions.size() ? &nf.instructions[pos + 1] : nullptr;
                std::vector<ContextItem> items = step(st, insn, next, nf, spec);
                res.block_ctx[b.id].insert(items.begin(), items.end());
            }
            const Instruction& tail = nf.instructions[b.last];
            if (k + 1 < path->size()) {
                if (tail.kind == InsnKind::jump_cond && b.successors.size() == 2) {
                    bool taken = (*path)[k + 1] == b.successors[0];
                    std::vector<ContextItem> items = apply_branch(st, tail, taken, nf, spec);
                    res.block_ctx[(*path)[k + 1]].insert(items.begin(), items.end());
                }
            } else if (tail.kind == InsnKind::exit_prog) {
                PathAction pa;
                pa.hook = nf.hook;
                pa.action = st.reg[0].tag == ValueTag::constant && st.reg[0].value
                                ? spec.action_name(nf.hook, *st.reg[0].value)
                                : "unknown";
                pa.blocks = *path;
                pa.pairs = st.pairs;
                res.path_actions.push_back(std::move(pa));
            }
        }
        ++res.paths_walked;
    }
    return res;
}

std::string cfgnc_to_json(const CfgNc& result) {
    ojson j;
    j["blocks"] = ojson::array();
    for (const BasicBlock& b : result.cfg.blocks) {
        ojson jb;
        jb["id"] = b.id;
        jb["first"] = b.first;
        jb["last"] = b.last;
        jb["successors"] = b.successors;
        j["blocks"].push_back(jb);
    }
    j["entry"] = result.cfg.entry;
    j["exits"] = result.cfg.exits;
    j["block_ctx"] = ojson::object();
    for (const BasicBlock& b : result.cfg.blocks) {
        ojson list = ojson::array();
        auto it = result.block_ctx.find(b.id);
        if (it != result.block_ctx.end()) {
            for (const ContextItem& item : it->second) {
                ojson ji;
                ji["kind"] = context_kind_name(item.kind);
                ojson args = ojson::array();
                args.push_back(item.a);
                if (!item.b.empty())
                    args.push_back(item.b);
                ji["args"] = args;
                list.push_back(ji);
            }
        }
        j["block_ctx"][b.id] = list;
    }
    j["path_actions"] = ojson::array();
    for (const PathAction& pa : result.path_actions) {
        ojson jp;
        jp["hook"] = pa.hook;
        jp["action"] = pa.action;
        jp["blocks"] = pa.blocks;
        ojson pairs = ojson::array();
        for (const PathPair& pair : pa.pairs) {
            ojson pj;
            pj["field"] = pair.field;
            pj["value"] = pair.value;
            pj["negated"] = pair.negated;
            pairs.push_back(pj);
        }
        jp["pairs"] = pairs;
        j["path_actions"].push_back(jp);
    }
    j["paths"] = result.paths_walked;
    return j.dump(2) + "\n";
}

} // namespace prashna
