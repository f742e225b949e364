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

#include "ulaudit/report.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

constexpr double kWidth = 480, kHeight = 400;
constexpr double kLeft = 60, kRight = 130, kTop = 30, kBottom = 50;
constexpr double kLogMin = -3.0;  // axes start at 1e-3
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

double PlotX(double v) {
  const double lv = std::clamp(std::log10(std::max(v, 1e-3)), kLogMin, 0.0);
  return kLeft + (lv - kLogMin) / -kLogMin * (kWidth - kLeft - kRight);
}

double PlotY(double v) {
  const double lv = std::clamp(std::log10(std::max(v, 1e-3)), kLogMin, 0.0);
  return kHeight - kBottom - (lv - kLogMin) / -kLogMin * (kHeight - kTop - kBottom);
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

void WriteRocCsv(std::ostream& out, const RocCurve& roc, const std::string& hash) {
  out << fmt::format("# config_hash={}\n", hash);
  out << fmt::format("# positives={} negatives={} auc_twice_pairs={}\n", roc.positives,
                     roc.negatives, roc.auc_twice_pairs);
  out << "fpr,tpr,threshold\n";
  for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
    out << fmt::format("{},{},{}\n", roc.fpr[i], roc.tpr[i], roc.thresholds[i]);
  }
}

RocCurve ReadRocCsv(std::istream& in) {
  RocCurve roc;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned long long p, n, a;
      if (std::sscanf(line.c_str(), "# positives=%llu negatives=%llu auc_twice_pairs=%llu",
                      &p, &n, &a) == 3) {
        roc.positives = p;
        roc.negatives = n;
        roc.auc_twice_pairs = a;
      }
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      Fail(ErrorKind::kIo, fmt::format("roc csv: bad line '{}'", line));
    }
    try {
      roc.fpr.push_back(std::stod(a));
      roc.tpr.push_back(std::stod(b));
      roc.thresholds.push_back(std::stod(c));
    } catch (const std::logic_error&) {
      Fail(ErrorKind::kIo, fmt::format("roc csv: bad number in '{}'", line));
    }
  }
  return roc;
}

void WriteGapCsv(std::ostream& out, const GapReport& gaps, const std::string& hash) {
  out << fmt::format("# config_hash={}\n", hash);
  const bool vul = !gaps.rows.empty() && gaps.rows[0].acc_vulnerable_remain.has_value();
  out << "method,acc_forget,acc_remain,acc_test";
  if (vul) out << ",acc_vulnerable_remain";
  out << ",delta_forget,delta_remain,delta_test";
  if (vul) out << ",delta_vulnerable_remain,unintended_forgetting";
  out << '\n';
  for (const GapRow& r : gaps.rows) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f}", r.method, r.acc_forget, r.acc_remain,
                       r.acc_test);
    if (vul) out << fmt::format(",{:.6f}", *r.acc_vulnerable_remain);
    out << fmt::format(",{:.6f},{:.6f},{:.6f}", r.delta_forget, r.delta_remain,
                       r.delta_test);
    if (vul) {
      out << fmt::format(",{:.6f},{}", *r.delta_vulnerable_remain,
                         r.unintended_forgetting ? "yes" : "no");
    }
    out << '\n';
  }
}

void WriteAuxCsv(std::ostream& out, const std::vector<AuxRecord>& aux,
                 const std::string& hash) {
  out << fmt::format("# config_hash={}\n", hash);
  out << "target_id,group,log_trained_leakage,log_remained_leakage\n";
  for (const AuxRecord& a : aux) {
    out << fmt::format("{},{},{},{}\n", a.target_id, ToString(a.group),
                       a.log_trained_leakage, a.log_remained_leakage);
  }
}

std::string ReadEmbeddedHash(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, fmt::format("cannot read {}", path));
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find("config_hash");
    if (pos == std::string::npos) continue;
    std::string rest = line.substr(pos + 11);
    const auto b = rest.find_first_of("0123456789abcdef");
    if (b == std::string::npos) return "";
    rest = rest.substr(b);
    return rest.substr(0, rest.find_first_not_of("0123456789abcdef"));
  }
  return "";
}

std::string RocSvg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                   const std::string& hash) {
  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, kHeight);
  s += fmt::format("<!-- config_hash={} -->\n", hash);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = PlotX(1e-3), x1 = PlotX(1.0), y0 = PlotY(1e-3), y1 = PlotY(1.0);
  for (int e = -3; e <= 0; ++e) {
    const double v = std::pow(10.0, e);
    s += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n",
        PlotX(v), y0, PlotX(v), y1);
    s += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n",
        x0, PlotY(v), x1, PlotY(v));
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">1e{}</text>\n",
                     PlotX(v), y0 + 16, e);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n",
                     x0 - 6, PlotY(v) + 4, e);
  }
  s += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      x0, y1, x1 - x0, y0 - y1);
  s += fmt::format(
      "<polyline points=\"{:.2f},{:.2f} {:.2f},{:.2f}\" stroke=\"#999\" "
      "stroke-dasharray=\"4 3\" fill=\"none\"/>\n",
      x0, y0, x1, y1);
  s += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">False positive rate</text>\n",
      (x0 + x1) / 2, kHeight - 12);
  s += fmt::format(
      "<text x=\"14\" y=\"{:.2f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 14 {:.2f})\">True positive rate</text>\n",
      (y0 + y1) / 2, (y0 + y1) / 2);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, roc] = curves[c];
    const char* color = kColors[c % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
      // Staircase: horizontal then vertical, matching the step convention.
      if (i > 0) pts += fmt::format("{:.2f},{:.2f} ", PlotX(roc.fpr[i]), PlotY(roc.tpr[i - 1]));
      pts += fmt::format("{:.2f},{:.2f} ", PlotX(roc.fpr[i]), PlotY(roc.tpr[i]));
    }
    if (!pts.empty()) pts.pop_back();
    s += fmt::format(
        "<polyline points=\"{}\" stroke=\"{}\" stroke-width=\"1.5\" fill=\"none\"/>\n", pts,
        color);
    const double ly = y1 + 14 + 16 * static_cast<double>(c);
    s += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        x1 + 10, ly, x1 + 28, ly, color);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{} ({:.3f})</text>\n", x1 + 32, ly + 4,
                     Escape(name), roc.Auc());
  }
  s += "</svg>\n";
  return s;
}

std::string HistogramSvg(const std::string& title, std::span<const double> positives,
                         std::span<const double> negatives, const std::string& hash,
                         std::size_t bins) {
  Require(bins >= 1, "histogram needs bins");
  double lo = 0, hi = 1;
  bool any = false;
  for (auto* v : {&positives, &negatives}) {
    for (double x : *v) {
      if (!std::isfinite(x)) continue;
      lo = any ? std::min(lo, x) : x;
      hi = any ? std::max(hi, x) : x;
      any = true;
    }
  }
  if (hi <= lo) hi = lo + 1;
  auto count = [&](std::span<const double> v) {
    std::vector<double> h(bins, 0.0);
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
      h[std::min(b, bins - 1)] += 1.0 / static_cast<double>(v.size());
    }
    return h;
  };
  const std::vector<double> hp = count(positives), hn = count(negatives);
  double top = 1e-12;
  for (double v : hp) top = std::max(top, v);
  for (double v : hn) top = std::max(top, v);
  const double w = kWidth - kLeft - 20, h = kHeight - kTop - kBottom;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, kHeight);
  s += fmt::format("<!-- config_hash={} -->\n", hash);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += fmt::format("<text x=\"{:.2f}\" y=\"18\" text-anchor=\"middle\">{}</text>\n",
                   kLeft + w / 2, Escape(title));
  const double bw = w / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    for (int k = 0; k < 2; ++k) {
      const double v = (k == 0 ? hp : hn)[b];
      if (v <= 0) continue;
      const double bh = v / top * h;
      s += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
          "fill-opacity=\"0.5\"/>\n",
          kLeft + bw * static_cast<double>(b), kTop + h - bh, bw, bh,
          k == 0 ? kColors[1] : kColors[0]);
    }
  }
  s += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, w, h);
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"start\">{:.3g}</text>\n",
                   kLeft, kTop + h + 16, lo);
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n",
                   kLeft + w, kTop + h + 16, hi);
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\">positives</text>\n",
                   kLeft + 8, kTop + 14, kColors[1]);
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\">negatives</text>\n",
                   kLeft + 8, kTop + 28, kColors[0]);
  s += "</svg>\n";
  return s;
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) Fail(ErrorKind::kIo, fmt::format("cannot write {}", tmp));
    out << content;
    if (!out) Fail(ErrorKind::kIo, fmt::format("write failed: {}", tmp));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, fmt::format("cannot move {} to {}: {}", tmp, path, ec.message()));
}

}  // namespace ulaudit
