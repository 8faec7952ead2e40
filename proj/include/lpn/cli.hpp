// Copyright 2026 The lpn Authors
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

#ifndef LPN_CLI_HPP_
#define LPN_CLI_HPP_

#include <string>
#include <vector>

namespace lpn {

// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.
int cli_main(const std::vector<std::string>& args);

}  // namespace lpn

#endif  // LPN_CLI_HPP_
