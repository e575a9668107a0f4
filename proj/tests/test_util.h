// Copyright 2026 The Authors.
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


#ifndef PRUNECAL_TESTS_TEST_UTIL_H_
#define PRUNECAL_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "prunecal/error.h"

namespace testutil {

// Kind of the prunecal::Error thrown by fn, or nullopt if it returns.
template <typename Fn>
std::optional<prunecal::ErrorKind> ThrownKind(Fn&& fn) {
  try {
    fn();
  } catch (const prunecal::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Message of the prunecal::Error thrown by fn, or "" if it returns.
template <typename Fn>
std::string ThrownDetail(Fn&& fn) {
  try {
    fn();
  } catch (const prunecal::Error& e) {
    return e.detail();
  }
  return "";
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  static std::mt19937_64 gen(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path() /
                   ("prunecal_test_" + name + "_" + std::to_string(gen()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil

#endif  // PRUNECAL_TESTS_TEST_UTIL_H_
