// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(matchforge_cli::main_with_args(std::env::args_os()));
}
