// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WKWS_CLI_H_
#define WKWS_CLI_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wkws/eval.h"
#include "wkws/synth.h"

namespace wkws {

inline constexpr const char* kToolkitVersion = "0.3.0";

// Exit codes: 0 success, 1 validation / usage error, 2 runtime error.
int RunCli(const std::vector<std::string>& args);
int RunCli(int argc, char** argv);

struct SmokeOptions {
  std::filesystem::path out_dir;
  uint64_t seed = 7;
  Variant variant = Variant::kWeak;
  std::optional<double> snr_db;
  double duration_seconds = 3.0;
  int epochs = 4;
  int jobs = 1;
};

// Micro corpus + synthetic noise -> synth -> train (tiny model) -> eval.
// Writes everything below out_dir; report.json is the final product.
// Errors name the failing stage.
EvalReport EndToEndSmoke(const SmokeOptions& options);

// 64-bit FNV-1a, logged for manifests so runs can be compared.
uint64_t Fnv1a(const std::string& bytes);

}  // namespace wkws

#endif  // WKWS_CLI_H_
