// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace prashna {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Splits '.'-terminated queries out of free-form text ('#' comments allowed).
// With `leftover` null, trailing content that never reaches a terminator
// throws SyntaxError; otherwise it is handed back for further buffering.
std::vector<std::string> split_queries(const std::string& text, std::string* leftover = nullptr);

struct ManifestEntry {
    std::string path;
    std::optional<std::string> name;
    std::optional<std::string> hook;
    std::optional<std::string> section;
    std::optional<std::string> maps;
};

// One input per line: `<path> [name=X] [hook=H] [section=S] [maps=M]`.
// Relative paths resolve against `base_dir`.
std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& base_dir);

struct SuiteEntry {
    std::string name;
    std::string query;
    bool expect_pass = false;
};

// One entry per line: `expect pass|fail <name>: <query>`.
std::vector<SuiteEntry> parse_suite(const std::string& text);

// Entry point behind main(): returns the process exit code. 0 on success,
// 1 when an assertion suite mismatches, 2 on any error.
int run_cli(int argc, const char* const* argv);

} // namespace prashna
