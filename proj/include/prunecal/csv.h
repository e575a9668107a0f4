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

#ifndef PRUNECAL_CSV_H_
#define PRUNECAL_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace prunecal {

// Shortest decimal string that round-trips to the same double.
std::string FormatDouble(double value);

// RFC 4180 field quoting: fields with a comma, quote, CR or LF are wrapped in
// quotes with embedded quotes doubled.
std::string CsvField(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { Row(header); }

  void Row(const std::vector<std::string>& fields);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

}  // namespace prunecal

#endif  // PRUNECAL_CSV_H_
