// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/cli.hpp"

int main(int argc, char **argv) { return fastray::runCli(argc, argv); }
