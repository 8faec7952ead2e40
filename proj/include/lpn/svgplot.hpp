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

#ifndef LPN_SVGPLOT_HPP_
#define LPN_SVGPLOT_HPP_

#include <string>
#include <vector>

#include "lpn/numerics.hpp"

namespace lpn {

struct Series {
  std::string label;
  Vec x, y;
};

// Deterministic standalone SVG; byte-identical for identical inputs.
std::string render_line_chart(const std::vector<Series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label);

std::string render_bar_chart(const std::vector<std::string>& labels, const Vec& values,
                             const std::string& title);

}  // namespace lpn

#endif  // LPN_SVGPLOT_HPP_
