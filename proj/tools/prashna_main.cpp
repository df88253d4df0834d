// SPDX-License-Identifier: MIT
#include "prashna/cli.hpp"

int main(int argc, char** argv) { return prashna::run_cli(argc, argv); }
