// SPDX-License-Identifier: MIT
#pragma once

#include <string>

#include "prashna/loader.hpp"
#include "prashna/netspec.hpp"

namespace prashna::testsupport {

// Canonical fact text one network function should analyze to, computed by a
// plain path-by-path interpreter kept deliberately separate from the library's
// transfer functions. Intended for equality checks against
// serialize_kb(analyze + emit_facts).
std::string reference_kb_text(const NfObject& nf, const NetSpec& spec);

} // namespace prashna::testsupport
