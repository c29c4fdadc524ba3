// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int
main(int argc, char **argv) {
    return occsplat::cli::run(argc, argv);
}
