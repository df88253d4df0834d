// SPDX-License-Identifier: MIT
#include "prashna/errors.hpp"

namespace prashna {

const char* errc_name(errc code) {
    switch (code) {
    case errc::truncated_program: return "TruncatedProgram";
    case errc::unknown_opcode: return "UnknownOpcode";
    case errc::bad_register: return "BadRegister";
    case errc::parse_error: return "ParseError";
    case errc::not_elf: return "NotElf";
    case errc::no_program_section: return "NoProgramSection";
    case errc::unresolved_map_relocation: return "UnresolvedMapRelocation";
    case errc::duplicate_map_name: return "DuplicateMapName";
    case errc::spec_parse_error: return "SpecParseError";
    case errc::overlapping_fields: return "OverlappingFields";
    case errc::missing_data_role: return "MissingDataRole";
    case errc::jump_out_of_range: return "JumpOutOfRange";
    case errc::cycle_detected: return "CycleDetected";
    case errc::path_budget_exceeded: return "PathBudgetExceeded";
    case errc::stack_out_of_range: return "StackOutOfRange";
    case errc::kb_parse_error: return "KbParseError";
    case errc::duplicate_nf_id: return "DuplicateNfId";
    case errc::syntax_error: return "SyntaxError";
    case errc::unknown_predicate: return "UnknownPredicate";
    case errc::arity_error: return "ArityError";
    case errc::unbound_negation: return "UnboundNegation";
    case errc::depth_exceeded: return "DepthExceeded";
    case errc::shadows_builtin: return "ShadowsBuiltin";
    case errc::unstratified_negation: return "UnstratifiedNegation";
    case errc::io_error: return "IoError";
    case errc::usage_error: return "UsageError";
    }
    return "Error";
}

} // namespace prashna
