// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "spinquad/cli.hpp"

int main(int argc, char** argv) { return spinquad::cli::run(argc, argv, std::cout, std::cerr); }
