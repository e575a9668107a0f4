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

#include "prunecal/error.h"

namespace prunecal {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kNonFiniteEntry: return "non-finite-entry";
    case ErrorKind::kNegativeAttention: return "negative-attention";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kTruncatedFile: return "truncated-file";
    case ErrorKind::kMalformedLine: return "malformed-line";
    case ErrorKind::kUnnormalizedProbs: return "unnormalized-probs";
    case ErrorKind::kUnknownTrueLabel: return "unknown-true-label";
    case ErrorKind::kInconsistentRecord: return "inconsistent-record";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kBudgetExceedsTokens: return "budget-exceeds-tokens";
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kZeroMass: return "zero-mass";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kCoverageOutOfRange: return "coverage-out-of-range";
    case ErrorKind::kTooFewRecords: return "too-few-records";
    case ErrorKind::kEmptyKept: return "empty-kept";
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kUsage: return "usage-error";
    case ErrorKind::kInternal: return "internal-error";
  }
  return "unknown";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kInvalidConfig:
      return 1;
    case ErrorKind::kInternal:
      return 3;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

}  // namespace prunecal
