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

#ifndef LPN_CONFIG_HPP_
#define LPN_CONFIG_HPP_

#include <filesystem>

#include "lpn/ppo.hpp"

namespace lpn {

bool operator==(const TrainConfig& a, const TrainConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

// Flat `key = value` file with '#' comments. Unknown keys and malformed
// lines are rejected with file:line context; `env` is required.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical serialization; re-parsing yields an equal RunConfig.
std::string config_to_text(const RunConfig& cfg);
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace lpn

#endif  // LPN_CONFIG_HPP_
