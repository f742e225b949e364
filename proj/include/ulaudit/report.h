// Copyright 2026 The ulaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and SVG emitters for audit artifacts. Every file starts with a
// "# config_hash=..." line (an XML comment in SVGs).

#ifndef ULAUDIT_REPORT_H_
#define ULAUDIT_REPORT_H_

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ulaudit/inference.h"
#include "ulaudit/metrics.h"

namespace ulaudit {

void WriteRocCsv(std::ostream& out, const RocCurve& roc, const std::string& config_hash);
RocCurve ReadRocCsv(std::istream& in);

void WriteGapCsv(std::ostream& out, const GapReport& gaps, const std::string& config_hash);

void WriteAuxCsv(std::ostream& out, const std::vector<AuxRecord>& aux,
                 const std::string& config_hash);

// Reads the hash from the first line of an artifact; empty if absent.
std::string ReadEmbeddedHash(const std::string& path);

// Log-log ROC plot, both axes spanning [1e-3, 1], one polyline per curve.
std::string RocSvg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                   const std::string& config_hash);

// Overlaid histograms of positive and negative scores.
std::string HistogramSvg(const std::string& title, std::span<const double> positives,
                         std::span<const double> negatives, const std::string& config_hash,
                         std::size_t bins = 30);

// Writes `content` to `path` (via a temporary file), surfacing the path on
// failure.
void WriteFileAtomic(const std::string& path, const std::string& content);

}  // namespace ulaudit

#endif  // ULAUDIT_REPORT_H_
