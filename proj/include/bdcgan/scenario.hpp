/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

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

#ifndef BDCGAN_SCENARIO_HPP_
#define BDCGAN_SCENARIO_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "bdcgan/errors.hpp"

namespace bdcgan {

// Which parts of the generator run binarized, and the integer input scale.
struct ScenarioConfig {
  std::string name = "S0";
  bool input_as_integer = false;
  std::int32_t a = 1;  // only meaningful when input_as_integer
  bool bfc = false;       // fc1 and fc2
  bool bbna1 = false;     // bna1 and bna1b
  bool bdeconv1 = false;
  bool bbna2 = false;
  bool bdeconv2 = false;

  bool any_binarized() const { return bfc || bbna1 || bdeconv1 || bbna2 || bdeconv2; }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline const std::array<ScenarioConfig, 7>& scenario_presets() {
  //                                 name    int    A     bfc    bbna1  bdc1   bbna2  bdc2
  static const std::array<ScenarioConfig, 7> presets{{
      {"S0", false, 1, false, false, false, false, false},
      {"S1-1", true, 1, true, false, false, false, false},
      {"S1-2", true, 1, true, true, false, false, false},
      {"S2-1", true, 127, true, true, false, false, false},
      {"S2-2", true, 4095, true, true, false, false, false},
      {"S3-1", true, 1, true, true, true, true, false},
      {"S3-2", true, 1, true, true, true, true, true},
  }};
  return presets;
}

inline std::string scenario_names() {
  std::string out;
  for (const auto& s : scenario_presets()) out += (out.empty() ? "" : ", ") + s.name;
  return out;
}

inline ScenarioConfig scenario_by_name(std::string_view name) {
  for (const auto& s : scenario_presets())
    if (s.name == name) return s;
  throw ValueError("unknown scenario '" + std::string(name) + "'; valid names: " + scenario_names());
}

}  // namespace bdcgan

#endif  // BDCGAN_SCENARIO_HPP_
