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

#ifndef PRUNECAL_ERROR_H_
#define PRUNECAL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace prunecal {

enum class ErrorKind {
  // Feature sets and files.
  kDimensionMismatch,
  kNonFiniteEntry,
  kNegativeAttention,
  kBadMagic,
  kTruncatedFile,
  // Prediction records.
  kMalformedLine,
  kUnnormalizedProbs,
  kUnknownTrueLabel,
  kInconsistentRecord,
  // Selection.
  kIndexOutOfRange,
  kBudgetExceedsTokens,
  kInvalidConfig,
  // Metrics.
  kZeroMass,
  kEmptyInput,
  kCoverageOutOfRange,
  kTooFewRecords,
  // Surrogate.
  kEmptyKept,
  // Environment.
  kIo,
  kUsage,
  kInternal,
};

// Stable kebab-case name, e.g. "negative-attention".
std::string_view ErrorKindName(ErrorKind kind);

// Process exit code for the CLI: 1 usage, 2 data, 3 internal invariant.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace prunecal

#endif  // PRUNECAL_ERROR_H_
