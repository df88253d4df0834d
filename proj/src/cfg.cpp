// SPDX-License-Identifier: MIT
#include "prashna/cfg.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "prashna/errors.hpp"

namespace prashna {

size_t Cfg::index_of(const std::string& id) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].id == id)
            return i;
    fail(errc::jump_out_of_range, "unknown block '" + id + "'");
}

const BasicBlock& Cfg::block(const std::string& id) const { return blocks[index_of(id)]; }

namespace {

bool is_terminator(const Instruction& insn) {
    return insn.kind == InsnKind::jump_cond || insn.kind == InsnKind::jump_uncond ||
           insn.kind == InsnKind::exit_prog;
}

bool can_fall_through(const Instruction& insn) {
    return insn.kind != InsnKind::jump_uncond && insn.kind != InsnKind::exit_prog;
}

} // namespace

Cfg build_cfg(const std::vector<Instruction>& instructions) {
    if (instructions.empty())
        fail(errc::jump_out_of_range, "program has no instructions");

    std::map<size_t, size_t> slot_to_pos;
    for (size_t pos = 0; pos < instructions.size(); ++pos)
        slot_to_pos[instructions[pos].index] = pos;
    const size_t total_slots =
        instructions.back().index + (is_wide(instructions.back().opcode) ? 2 : 1);

    auto target_pos = [&](const Instruction& insn) {
        int64_t target = jump_target(insn);
        auto it = target < 0 ? slot_to_pos.end() : slot_to_pos.find(static_cast<size_t>(target));
        if (it == slot_to_pos.end())
            fail(errc::jump_out_of_range, "jump at slot " + std::to_string(insn.index) +
                                              " targets slot " + std::to_string(target) + " of " +
                                              std::to_string(total_slots));
        return it->second;
    };

    if (can_fall_through(instructions.back()))
        fail(errc::jump_out_of_range,
             "control falls off the end at slot " + std::to_string(instructions.back().index));

    std::set<size_t> leaders; // positions
    leaders.insert(0);
    for (size_t pos = 0; pos < instructions.size(); ++pos) {
        const Instruction& insn = instructions[pos];
        if (insn.kind == InsnKind::jump_cond || insn.kind == InsnKind::jump_uncond)
            leaders.insert(target_pos(insn));
        if (is_terminator(insn) && pos + 1 < instructions.size())
            leaders.insert(pos + 1);
    }

    Cfg cfg;
    std::map<size_t, size_t> leader_to_block; // leader position -> block index
    for (size_t pos : leaders) {
        BasicBlock b;
        b.id = "node_" + std::to_string(cfg.blocks.size());
        b.first = pos;
        leader_to_block[pos] = cfg.blocks.size();
        cfg.blocks.push_back(b);
    }
    for (BasicBlock& b : cfg.blocks) {
        size_t pos = b.first;
        while (pos + 1 < instructions.size() && !leaders.count(pos + 1) &&
               !is_terminator(instructions[pos]))
            ++pos;
        b.last = pos;
    }

    auto block_id_at = [&](size_t pos) { return cfg.blocks[leader_to_block.at(pos)].id; };

    for (BasicBlock& b : cfg.blocks) {
        const Instruction& tail = instructions[b.last];
        switch (tail.kind) {
        case InsnKind::jump_cond: {
            size_t taken = target_pos(tail);
            size_t fall = b.last + 1; // rejected above if the program ends here
            if (fall >= instructions.size())
                fail(errc::jump_out_of_range,
                     "control falls off the end at slot " + std::to_string(tail.index));
            b.successors.push_back(block_id_at(taken));
            if (taken != fall)
                b.successors.push_back(block_id_at(fall));
            break;
        }
        case InsnKind::jump_uncond:
            b.successors.push_back(block_id_at(target_pos(tail)));
            break;
        case InsnKind::exit_prog:
            break;
        default:
            b.successors.push_back(block_id_at(b.last + 1));
        }
    }

    for (const BasicBlock& b : cfg.blocks)
        for (const std::string& succ : b.successors) {
            const BasicBlock& t = cfg.block(succ);
            if (t.first <= b.first)
                fail(errc::cycle_detected, b.id + " -> " + succ + " closes a loop");
        }

    cfg.entry = cfg.blocks.front().id;
    for (const BasicBlock& b : cfg.blocks)
        if (instructions[b.last].kind == InsnKind::exit_prog)
            cfg.exits.push_back(b.id);
    return cfg;
}

uint64_t default_path_budget() {
    if (const char* env = std::getenv("PRASHNA_PATH_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return 1000000;
}

uint64_t count_paths(const Cfg& cfg) {
    // blocks are topologically ordered because all edges point forward
    std::vector<uint64_t> counts(cfg.blocks.size(), 0);
    for (size_t i = cfg.blocks.size(); i-- > 0;) {
        const BasicBlock& b = cfg.blocks[i];
        if (b.successors.empty()) {
            counts[i] = 1;
            continue;
        }
        uint64_t total = 0;
        for (const std::string& succ : b.successors) {
            uint64_t c = counts[cfg.index_of(succ)];
            total = (total > UINT64_MAX - c) ? UINT64_MAX : total + c;
        }
        counts[i] = total;
    }
    return counts.empty() ? 0 : counts[cfg.index_of(cfg.entry)];
}

PathStream::PathStream(const Cfg& cfg, uint64_t budget) : cfg_(&cfg), budget_(budget) {}

std::optional<std::vector<std::string>> PathStream::next() {
    if (done_)
        return std::nullopt;
    if (!started_) {
        started_ = true;
        stack_.push_back({cfg_->index_of(cfg_->entry), 0});
    } else if (!stack_.empty()) {
        stack_.pop_back(); // drop the leaf emitted by the previous call
    }
    while (!stack_.empty()) {
        auto [block, cursor] = stack_.back();
        const std::vector<std::string>& succs = cfg_->blocks[block].successors;
        if (succs.empty()) {
            ++yielded_;
            if (yielded_ > budget_)
                fail(errc::path_budget_exceeded,
                     "more than " + std::to_string(budget_) + " paths");
            std::vector<std::string> path;
            path.reserve(stack_.size());
            for (const auto& [bi, cur] : stack_)
                path.push_back(cfg_->blocks[bi].id);
            return path;
        }
        if (cursor < succs.size()) {
            ++stack_.back().second;
            stack_.push_back({cfg_->index_of(succs[cursor]), 0});
        } else {
            stack_.pop_back();
        }
    }
    done_ = true;
    return std::nullopt;
}

std::string to_dot(const Cfg& cfg) {
    std::ostringstream os;
    os << "digraph cfg {\n";
    for (const BasicBlock& b : cfg.blocks)
        os << "  " << b.id << " [label=\"" << b.id << " [" << b.first << ".." << b.last
           << "]\"];\n";
    for (const BasicBlock& b : cfg.blocks)
        for (const std::string& succ : b.successors)
            os << "  " << b.id << " -> " << succ << ";\n";
    os << "}\n";
    return os.str();
}

} // namespace prashna
