/* Copyright 2026 The nucseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <ostream>
#include <span>
#include <string>

namespace nucseg {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitInvalidConfig = 3,
  kExitMissingInput = 4,
};

/// Runs one subcommand. args excludes the program name. Results go to `out`;
/// logs and the one-line error record go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// argv adapter for main().
int run_main(int argc, char** argv);

}  // namespace nucseg
