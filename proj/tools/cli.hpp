// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_TOOLS_CLI_HPP
#define OCCSPLAT_TOOLS_CLI_HPP

#include <cstdint>
#include <ostream>
#include <string>

#include "json.hpp"

namespace occsplat::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kIoError = 2,
    kVerifyFailed = 3,
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    int seeds = 1; // gradcheck sweep length
    int poses = 5;
};

/// Runs the oracle suite. Writes one JSON line per check to `out` and a
/// human-readable table to `err`. Returns true when every check passed.
bool run_verify(const VerifyOptions &opts, std::ostream &out, std::ostream &err);

/// Entry point shared by the executables.
int run(int argc, char **argv);

} // namespace occsplat::cli

#endif // OCCSPLAT_TOOLS_CLI_HPP
