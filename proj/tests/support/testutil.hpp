// SPDX-License-Identifier: MIT
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "prashna/errors.hpp"

namespace prashna::testsupport {

inline std::string fixture_path(const std::string& rel) {
    return std::string(PRASHNA_FIXTURE_DIR) + "/" + rel;
}

inline std::string data_path(const std::string& rel) {
    return std::string(PRASHNA_DATA_DIR) + "/" + rel;
}

inline std::string bin_path(const std::string& name) {
    return std::string(PRASHNA_BIN_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Scratch directory removed when the test binary exits.
class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("prashna_test_" + std::to_string(rd()) + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name, const std::string& content) const {
        std::filesystem::path p = path_ / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }

    std::string join(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

} // namespace prashna::testsupport

// Checks that `expr` throws prashna::Error with the given code.
#define CHECK_FAILS(expr, errcode)                                                                 \
    do {                                                                                           \
        bool threw_ = false;                                                                       \
        try {                                                                                      \
            (void)(expr);                                                                          \
        } catch (const prashna::Error& e_) {                                                       \
            threw_ = true;                                                                         \
            CHECK_MESSAGE(e_.code() == (errcode), #expr << " threw: " << e_.what());               \
        }                                                                                          \
        CHECK_MESSAGE(threw_, #expr << " did not throw");                                          \
    } while (0)
