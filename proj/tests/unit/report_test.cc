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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ulaudit/common.h"
#include "ulaudit/metrics.h"
#include "ulaudit/report.h"

namespace ulaudit {
namespace {

namespace fs = std::filesystem;

RocCurve SmallRoc() {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8, 0.8, 0.05};
  const bool t[] = {false, false, true, true, false, true};
  return ComputeRoc(s, t);
}

TEST(RocCsv, RoundTripIsExact) {
  const RocCurve r = SmallRoc();
  std::stringstream ss;
  WriteRocCsv(ss, r, "0123456789abcdef");
  EXPECT_EQ(ss.str().rfind("# config_hash=0123456789abcdef\n", 0), 0u);
  EXPECT_EQ(ReadRocCsv(ss), r);
}

TEST(RocCsv, BadRowIsIoError) {
  std::istringstream in("# config_hash=x\nfpr,tpr,threshold\n0.1,0.2\n");
  try {
    ReadRocCsv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(RocSvg, MatchesGolden) {
  const std::string svg = RocSvg({{"lambda", SmallRoc()}}, "0123456789abcdef");
  const fs::path golden = fs::path(ULAUDIT_GOLDEN_DIR) / "roc_small.svg";
  if (std::getenv("ULAUDIT_UPDATE_GOLDEN")) std::ofstream(golden) << svg;
  std::ifstream in(golden);
  ASSERT_TRUE(in) << golden;
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(svg, ss.str());
}

TEST(RocSvg, OnePolylinePerCurve) {
  const std::string svg =
      RocSvg({{"a", SmallRoc()}, {"b", SmallRoc()}, {"c", SmallRoc()}}, "h");
  std::size_t count = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++count;
  }
  // Three curves plus the chance diagonal at most.
  EXPECT_GE(count, 3u);
  EXPECT_LE(count, 4u);
  EXPECT_NE(svg.find("config_hash=h"), std::string::npos);
}

TEST(HistogramSvg, EmptyInputsStillRender) {
  const std::vector<double> none;
  const std::string svg = HistogramSvg("empty", none, none, "h");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Artifacts, EmbeddedHashAndAtomicWrite) {
  const fs::path dir = fs::temp_directory_path() / "ulaudit_unit_report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string csv = (dir / "a.csv").string(), svg = (dir / "a.svg").string();
  WriteFileAtomic(csv, "# config_hash=abc\nx\n");
  WriteFileAtomic(svg, RocSvg({{"a", SmallRoc()}}, "def"));
  EXPECT_EQ(ReadEmbeddedHash(csv), "abc");
  EXPECT_EQ(ReadEmbeddedHash(svg), "def");
  WriteFileAtomic((dir / "b.csv").string(), "x\n");
  EXPECT_EQ(ReadEmbeddedHash((dir / "b.csv").string()), "");
  try {
    WriteFileAtomic((dir / "missing" / "c.csv").string(), "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
}

TEST(GapCsv, OptionalColumnLeftEmpty) {
  GapReport g;
  g.rows.push_back({.method = "retrain", .acc_forget = 0.5});
  std::stringstream ss;
  WriteGapCsv(ss, g, "h");
  const std::string s = ss.str();
  EXPECT_EQ(s.rfind("# config_hash=h\n", 0), 0u);
  EXPECT_NE(s.find("retrain,0.5"), std::string::npos);
}

}  // namespace
}  // namespace ulaudit
