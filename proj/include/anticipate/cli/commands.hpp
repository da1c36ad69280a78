// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace anticipate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // data, validation or I/O failure
inline constexpr int kExitUsage = 2;    // bad flags or config

// Runs one `anticipate` invocation; `args` excludes the program name.
//
//   prompts build  --data DIR --out FILE [--strategy S] [--n N] [--k K] [--seed S] [--fixed FILE]
//   synth gen      --out DIR [--seed S] [--videos N]
//   train          --data DIR --out DIR [--seed S] [--epochs N] [--threads N]
//   eval           --data DIR --out DIR (--checkpoint FILE | --predictions FILE) [--split S] [--threads N]
//   rollout        --data DIR --out DIR --checkpoint FILE [--example ID] [--steps 0,5,19] [--top K]
//   validate       PATH...
//
// Every command except validate accepts --config FILE (a RunConfig) and
// writes the resolved config to run_config.json in its output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anticipate::cli
