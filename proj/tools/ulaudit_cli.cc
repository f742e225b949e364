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

// ulaudit command-line tool.
//
//   ulaudit config init [--out FILE]
//   ulaudit score-targets|grid-search|run-shadows|audit|report --config FILE
//           [--jobs N] [--seed S] [--resume] [--out DIR]
//   ulaudit compare RUN_DIR...
//
// Exit codes: 0 success, 2 configuration error, 3 compute abort, 4 I/O error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ulaudit/common.h"
#include "ulaudit/config.h"
#include "ulaudit/pipeline.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitIo = 4;

int ExitCode(ulaudit::ErrorKind kind) {
  switch (kind) {
    case ulaudit::ErrorKind::kCompute:
      return kExitCompute;
    case ulaudit::ErrorKind::kIo:
      return kExitIo;
    case ulaudit::ErrorKind::kConfig:
    case ulaudit::ErrorKind::kInvalidArgument:
      break;
  }
  return kExitConfig;
}

struct RunFlags {
  std::string config;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  std::string out;
};

void AddRunFlags(CLI::App* cmd, RunFlags* f) {
  cmd->add_option("--config", f->config, "experiment YAML")->required();
  cmd->add_option("--jobs", f->jobs, "parallel shadow workers")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f->seed, "override the master seed");
  cmd->add_flag("--resume", f->resume, "continue from partial shadow stores");
  cmd->add_option("--out", f->out, "override the output directory");
}

ulaudit::Pipeline MakePipeline(const RunFlags& f) {
  ulaudit::ExperimentConfig config = ulaudit::LoadConfig(f.config);
  if (f.seed) config.seed = *f.seed;
  if (!f.out.empty()) config.output_dir = f.out;
  if (config.output_dir.empty()) {
    ulaudit::Fail(ulaudit::ErrorKind::kConfig, "output_dir: must be set for CLI runs");
  }
  ulaudit::PipelineOptions options;
  options.jobs = f.jobs;
  options.resume = f.resume;
  options.log = [](const std::string& line) { std::cerr << line << '\n'; };
  return ulaudit::Pipeline(std::move(config), options);
}

void PrintMetrics(const ulaudit::ReportSummary& summary, const ulaudit::ExperimentConfig& c) {
  std::string header = fmt::format("{:<18} {:<12} {:>7} {:>7}", "attack", "subset", "auc", "acc");
  for (double f : c.fpr_points) header += fmt::format(" {:>11}", fmt::format("tpr@{}", f));
  std::cout << header << '\n';
  for (const auto& m : summary.metrics) {
    std::string row = fmt::format("{:<18} {:<12} {:>7.4f} {:>7.4f}", m.attack, m.subset, m.auc,
                                  m.attack_accuracy);
    for (double t : m.tpr_at_fpr) row += fmt::format(" {:>11.4f}", t);
    std::cout << row << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-sample privacy and efficacy audits of machine unlearning"};
  app.require_subcommand(1);

  CLI::App* config_cmd = app.add_subcommand("config", "configuration helpers");
  config_cmd->require_subcommand(1);
  CLI::App* init_cmd = config_cmd->add_subcommand("init", "print the default configuration");
  std::string init_out;
  init_cmd->add_option("--out", init_out, "write to a file instead of stdout");

  RunFlags flags;
  struct Stage {
    const char* name;
    const char* help;
  };
  const std::vector<Stage> stages = {
      {"score-targets", "run the vulnerability pre-attack"},
      {"grid-search", "tune the unlearning hyper against retraining"},
      {"run-shadows", "train and unlearn the shadow models"},
      {"audit", "score the audited model and write the report"},
      {"report", "rewrite metrics, ROC tables and plots"},
  };
  std::vector<CLI::App*> stage_cmds;
  for (const Stage& s : stages) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    AddRunFlags(cmd, &flags);
    stage_cmds.push_back(cmd);
  }
  CLI::App* compare_cmd = app.add_subcommand("compare", "side-by-side metrics of runs");
  std::vector<std::string> run_dirs;
  compare_cmd->add_option("runs", run_dirs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (init_cmd->parsed()) {
      const std::string yaml = ulaudit::DefaultConfigYaml();
      if (init_out.empty()) {
        std::cout << yaml;
      } else {
        std::ofstream out(init_out);
        if (!out || !(out << yaml)) {
          ulaudit::Fail(ulaudit::ErrorKind::kIo, fmt::format("cannot write {}", init_out));
        }
      }
      return 0;
    }
    if (compare_cmd->parsed()) {
      std::cout << ulaudit::CompareRuns(run_dirs);
      return 0;
    }
    ulaudit::Pipeline pipeline = MakePipeline(flags);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "score-targets") {
      const auto& v = pipeline.ScoreTargets();
      std::size_t vul = 0, prot = 0;
      for (const auto& s : v.scores) {
        vul += s.cls == ulaudit::VulnClass::kVulnerable;
        prot += s.cls == ulaudit::VulnClass::kProtected;
      }
      std::cout << fmt::format("{} samples: {} vulnerable, {} protected (threshold {:.4f})\n",
                               v.scores.size(), vul, prot, v.threshold);
    } else if (name == "grid-search") {
      const auto& g = pipeline.GridSearch();
      for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const auto& e = g.entries[i];
        std::cout << fmt::format("{}[{}] {:<13} {}\n", i == g.chosen ? '*' : ' ', i,
                                 ulaudit::ToString(e.hyper.method),
                                 e.diverged ? "diverged: " + e.error
                                            : fmt::format("gap {:.4f}", e.gap));
      }
    } else if (name == "run-shadows") {
      const auto& store = pipeline.RunShadows();
      std::cout << fmt::format("{} observations from {} models\n", store.size(),
                               store.ModelIndices().size());
    } else {
      PrintMetrics(pipeline.Report(), pipeline.config());
    }
    return 0;
  } catch (const ulaudit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}
