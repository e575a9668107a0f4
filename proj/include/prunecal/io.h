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

// File formats.
//
// Feature file (binary, little-endian):
//   "PCF1" | u32 version = 1 | u32 V | u32 d | V*d f32 features (row-major)
//   | V f32 attention
//
// Prediction file: JSON Lines, one object per record:
//   {"example_id": "...", "split": "...", "true_label": "yes",
//    "probs": {"yes": 0.7, "no": 0.3}}
// Optional "confidence" and "correct" keys are checked against the values
// recomputed from "probs".

#ifndef PRUNECAL_IO_H_
#define PRUNECAL_IO_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "prunecal/types.h"

namespace prunecal {

inline constexpr char kFeatureMagic[4] = {'P', 'C', 'F', '1'};
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

// Probabilities whose sum is within this of 1 are renormalized on load.
inline constexpr double kRenormalizeTolerance = 1e-6;

std::string EncodeFeatureSet(const TokenFeatureSet& fs);
TokenFeatureSet DecodeFeatureSet(std::string_view bytes);

void WriteFeatureFile(const std::filesystem::path& path,
                      const TokenFeatureSet& fs);
TokenFeatureSet ReadFeatureFile(const std::filesystem::path& path);

// Parses one JSON line. `line_number` is 1-based and only used in errors.
PredictionRecord ParsePredictionLine(std::string_view line,
                                     std::size_t line_number);
std::string FormatPredictionLine(const PredictionRecord& record);

std::vector<PredictionRecord> ReadPredictions(std::istream& in);
std::vector<PredictionRecord> ReadPredictionFile(
    const std::filesystem::path& path);
void WritePredictionFile(const std::filesystem::path& path,
                         const std::vector<PredictionRecord>& records);

// Whole-file helpers shared by the readers and the harness.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view data);

}  // namespace prunecal

#endif  // PRUNECAL_IO_H_
