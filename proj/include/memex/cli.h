// Copyright 2026 The Memex Authors.
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

#ifndef MEMEX_CLI_H_
#define MEMEX_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace memex {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

// Entry point of the `memex` tool. args excludes the program name. Returns
// the process exit code: 0 success, 1 data error, 2 configuration error.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace memex

#endif  // MEMEX_CLI_H_
