// Copyright 2026 The Compass Authors.
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

#include "compass/paths.h"

#include <cstdlib>

namespace compass {

std::filesystem::path default_fixture_dir() {
  if (const char* env = std::getenv("COMPASS_FIXTURES"); env && *env) return env;
  return std::filesystem::path(COMPASS_DATA_DIR) / "fixtures";
}

}  // namespace compass
