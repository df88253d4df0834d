// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prashna/isa.hpp"

namespace prashna {

struct BasicBlock {
    std::string id;    // "node_<k>" in program order
    size_t first = 0;  // position of the first instruction in the program vector
    size_t last = 0;   // position of the last instruction (inclusive)
    std::vector<std::string> successors; // taken edge first for conditional jumps
};

struct Cfg {
    std::vector<BasicBlock> blocks; // ascending by first instruction
    std::string entry;
    std::vector<std::string> exits;

    size_t index_of(const std::string& id) const;
    const BasicBlock& block(const std::string& id) const;
};

// Partitions a decoded program into basic blocks. Throws JumpOutOfRange for
// targets outside the program (or into the middle of a wide load, or when
// control can run off the end) and CycleDetected for backward edges.
Cfg build_cfg(const std::vector<Instruction>& instructions);

uint64_t default_path_budget(); // honours PRASHNA_PATH_BUDGET

// Total number of entry-to-exit paths, saturating at UINT64_MAX.
uint64_t count_paths(const Cfg& cfg);

// Lazily enumerates entry-to-exit paths in depth-first order, following the
// taken edge before the fallthrough. next() throws PathBudgetExceeded once
// more than `budget` paths have been produced.
class PathStream {
  public:
    explicit PathStream(const Cfg& cfg) : PathStream(cfg, default_path_budget()) {}
    PathStream(const Cfg& cfg, uint64_t budget);

    std::optional<std::vector<std::string>> next();

  private:
    const Cfg* cfg_;
    uint64_t budget_;
    uint64_t yielded_ = 0;
    bool started_ = false;
    bool done_ = false;
    std::vector<std::pair<size_t, size_t>> stack_; // (block index, successor cursor)
};

std::string to_dot(const Cfg& cfg);

} // namespace prashna
