// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace prashna {

// Every failure surfaced by the library carries one of these codes so callers
// (and tests) can dispatch on the condition instead of parsing messages.
enum class errc {
    // instruction decoding / text assembly
    truncated_program,
    unknown_opcode,
    bad_register,
    parse_error,
    // object loading
    not_elf,
    no_program_section,
    unresolved_map_relocation,
    duplicate_map_name,
    // protocol/buffer registry
    spec_parse_error,
    overlapping_fields,
    missing_data_role,
    // control flow
    jump_out_of_range,
    cycle_detected,
    path_budget_exceeded,
    // abstract interpretation
    stack_out_of_range,
    // knowledge base
    kb_parse_error,
    duplicate_nf_id,
    // query language
    syntax_error,
    unknown_predicate,
    arity_error,
    // query engine
    unbound_negation,
    depth_exceeded,
    shadows_builtin,
    unstratified_negation,
    // tooling
    io_error,
    usage_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) { throw Error(code, message); }

} // namespace prashna
