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

#include "prunecal/io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prunecal/error.h"

namespace prunecal {

namespace {

constexpr std::size_t kHeaderBytes = 16;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

std::uint32_t GetU32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(
             static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

void PutF32(std::string& out, float f) {
  PutU32(out, std::bit_cast<std::uint32_t>(f));
}

float GetF32(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<float>(GetU32(bytes, offset));
}

std::string LineContext(std::size_t line_number) {
  return "line " + std::to_string(line_number);
}

}  // namespace

std::string EncodeFeatureSet(const TokenFeatureSet& fs) {
  ValidateFeatureSet(fs);
  std::string out;
  out.reserve(kHeaderBytes + 4 * (fs.features.size() + fs.attention.size()));
  out.append(kFeatureMagic, 4);
  PutU32(out, kFeatureFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(fs.num_tokens));
  PutU32(out, static_cast<std::uint32_t>(fs.dim));
  for (float f : fs.features) PutF32(out, f);
  for (float a : fs.attention) PutF32(out, a);
  return out;
}

TokenFeatureSet DecodeFeatureSet(std::string_view bytes) {
  const std::size_t magic_len = std::min<std::size_t>(bytes.size(), 4);
  if (std::memcmp(bytes.data(), kFeatureMagic, magic_len) != 0) {
    throw Error(ErrorKind::kBadMagic, "expected \"PCF1\" magic");
  }
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorKind::kTruncatedFile,
                "header needs 16 bytes, file has " +
                    std::to_string(bytes.size()));
  }
  const std::uint32_t version = GetU32(bytes, 4);
  if (version != kFeatureFormatVersion) {
    throw Error(ErrorKind::kBadMagic,
                "unsupported version " + std::to_string(version));
  }
  TokenFeatureSet fs;
  fs.num_tokens = GetU32(bytes, 8);
  fs.dim = GetU32(bytes, 12);
  const std::size_t num_floats = fs.num_tokens * fs.dim + fs.num_tokens;
  const std::size_t expected = kHeaderBytes + 4 * num_floats;
  if (bytes.size() < expected) {
    throw Error(ErrorKind::kTruncatedFile,
                "header declares V=" + std::to_string(fs.num_tokens) +
                    " d=" + std::to_string(fs.dim) + " (" +
                    std::to_string(expected) + " bytes), file has " +
                    std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::to_string(bytes.size() - expected) +
                    " trailing bytes after payload");
  }
  std::size_t offset = kHeaderBytes;
  fs.features.resize(fs.num_tokens * fs.dim);
  for (float& f : fs.features) {
    f = GetF32(bytes, offset);
    offset += 4;
  }
  fs.attention.resize(fs.num_tokens);
  for (float& a : fs.attention) {
    a = GetF32(bytes, offset);
    offset += 4;
  }
  ValidateFeatureSet(fs);
  return fs;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "short write to '" + path.string() + "'");
  }
}

void WriteFeatureFile(const std::filesystem::path& path,
                      const TokenFeatureSet& fs) {
  WriteFileBytes(path, EncodeFeatureSet(fs));
}

TokenFeatureSet ReadFeatureFile(const std::filesystem::path& path) {
  const std::string bytes = ReadFileBytes(path);
  try {
    return DecodeFeatureSet(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

PredictionRecord ParsePredictionLine(std::string_view line,
                                     std::size_t line_number) {
  const std::string where = LineContext(line_number);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kMalformedLine, where + ": " + e.what());
  }
  auto require_string = [&](const char* key) -> std::string {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string()) {
      throw Error(ErrorKind::kMalformedLine,
                  where + ": missing string field '" + key + "'");
    }
    return doc[key].get<std::string>();
  };
  std::string example_id = require_string("example_id");
  std::string split = require_string("split");
  std::string true_label = require_string("true_label");
  if (!doc.contains("probs") || !doc["probs"].is_object() ||
      doc["probs"].empty()) {
    throw Error(ErrorKind::kMalformedLine,
                where + ": missing non-empty object field 'probs'");
  }

  ProbabilityMap probs;
  double sum = 0.0;
  for (const auto& [label, value] : doc["probs"].items()) {
    if (!value.is_number()) {
      throw Error(ErrorKind::kMalformedLine,
                  where + ": probability for '" + label + "' is not a number");
    }
    const double p = value.get<double>();
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorKind::kUnnormalizedProbs,
                  where + ": probability for '" + label + "' is " +
                      std::to_string(p));
    }
    probs.emplace(label, p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    throw Error(ErrorKind::kUnnormalizedProbs,
                where + ": probabilities sum to " + std::to_string(sum));
  }
  for (auto& [label, p] : probs) p /= sum;
  if (!probs.contains(true_label)) {
    throw Error(ErrorKind::kUnknownTrueLabel,
                where + ": true_label '" + true_label +
                    "' is not among the candidates");
  }

  PredictionRecord record = MakeRecord(std::move(example_id), std::move(split),
                                       std::move(probs), std::move(true_label));
  if (doc.contains("correct")) {
    if (!doc["correct"].is_boolean() ||
        doc["correct"].get<bool>() != record.correct) {
      throw Error(ErrorKind::kInconsistentRecord,
                  where + ": stored 'correct' disagrees with probs");
    }
  }
  if (doc.contains("confidence")) {
    if (!doc["confidence"].is_number() ||
        std::abs(doc["confidence"].get<double>() - record.confidence) >
            kRenormalizeTolerance) {
      throw Error(ErrorKind::kInconsistentRecord,
                  where + ": stored 'confidence' disagrees with probs");
    }
  }
  return record;
}

std::string FormatPredictionLine(const PredictionRecord& record) {
  nlohmann::json doc;
  doc["example_id"] = record.example_id;
  doc["split"] = record.split;
  doc["true_label"] = record.true_label;
  doc["probs"] = nlohmann::json::object();
  for (const auto& [label, p] : record.candidate_probs) doc["probs"][label] = p;
  doc["confidence"] = record.confidence;
  doc["correct"] = record.correct;
  return doc.dump();
}

std::vector<PredictionRecord> ReadPredictions(std::istream& in) {
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    records.push_back(ParsePredictionLine(line, line_number));
  }
  return records;
}

std::vector<PredictionRecord> ReadPredictionFile(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  }
  try {
    return ReadPredictions(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void WritePredictionFile(const std::filesystem::path& path,
                         const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    out += FormatPredictionLine(record);
    out += '\n';
  }
  WriteFileBytes(path, out);
}

}  // namespace prunecal
