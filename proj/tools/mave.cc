// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// mave: generate scenes, enhance, render binaurally, evaluate and report.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mave/error.h"
#include "mave/pipeline.h"

namespace {

int Finish(const std::string& stage, const mave::StageResult& result) {
  std::cout << stage << ": " << result.processed << " processed, "
            << result.skipped << " skipped, " << result.failures.size()
            << " failed\n";
  for (const auto& f : result.failures)
    std::cerr << "  " << f.scene_id << ": " << f.message << "\n";
  return result.ok() ? 0 : 1;
}

std::vector<std::string> Keys(const std::vector<std::string>& enhancers) {
  std::vector<std::string> keys;
  for (const auto& e : enhancers)
    keys.push_back(mave::EnhancerKey(mave::ParseEnhancer(e)));
  return keys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel speech enhancement scene simulator and evaluator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mave::kToolVersion);

  std::string config_path, out_dir, domain = "both", csv_path, report_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_scenes;
  std::size_t workers = 1;
  std::vector<std::string> enhancers, which;

  const auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Dataset directory")->required();
    cmd->add_option("--workers", workers, "Parallel workers")
        ->check(CLI::PositiveNumber);
  };
  const auto add_enhancer = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option(
        "--enhancer", enhancers,
        "passthrough, oracle-cirm, oracle-irm or external:DIR (repeatable)");
    if (required) opt->required();
  };

  auto* generate = app.add_subcommand("generate", "Sample and render scenes");
  generate->add_option("--config", config_path, "Generation config file")
      ->check(CLI::ExistingFile);
  generate->add_option("--seed", seed, "Override the config seed");
  generate->add_option("--n-scenes", n_scenes, "Override the scene count");
  add_out(generate);

  auto* enhance = app.add_subcommand("enhance", "Apply masks to every scene");
  add_out(enhance);
  add_enhancer(enhance, true);

  auto* render = app.add_subcommand("render", "Binaural rendering");
  add_out(render);
  render->add_option("--which", which,
                     "noisy, clean or an enhancer (repeatable)")
      ->required();

  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics.csv");
  add_out(evaluate);
  add_enhancer(evaluate, false);
  evaluate->add_option("--domain", domain, "mic, binaural or both")
      ->check(CLI::IsMember({"mic", "binaural", "both"}));

  auto* report = app.add_subcommand("report", "Markdown tables from a CSV");
  report->add_option("--out", out_dir, "Dataset directory");
  report->add_option("--csv", csv_path, "Metrics CSV (default OUT/metrics.csv)");
  report->add_option("--report", report_path,
                     "Report path (default beside the CSV)");

  auto* run = app.add_subcommand("run", "generate, enhance, render, evaluate, report");
  run->add_option("--config", config_path, "Generation config file")
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--n-scenes", n_scenes, "Override the scene count");
  add_out(run);
  add_enhancer(run, false);
  run->add_option("--domain", domain, "mic, binaural or both")
      ->check(CLI::IsMember({"mic", "binaural", "both"}));

  CLI11_PARSE(app, argc, argv);
  const std::vector<std::string> args(argv + 1, argv + argc);

  try {
    const auto load_config = [&] {
      mave::GenConfig config = config_path.empty()
                                   ? mave::GenConfig{}
                                   : mave::LoadGenConfig(config_path);
      if (seed) config.seed = *seed;
      if (n_scenes) config.n_scenes = *n_scenes;
      config.Validate();
      return config;
    };
    const auto metadata = [&](const std::string& stage) {
      const auto [hash, s] = mave::DatasetProvenance(out_dir);
      mave::WriteRunMetadata(out_dir, stage, hash, s, args);
    };
    const auto do_report = [&] {
      const std::string csv =
          csv_path.empty() ? out_dir + "/metrics.csv" : csv_path;
      const std::string md = report_path.empty()
                                 ? (std::filesystem::path(csv).parent_path() /
                                    "report.md").string()
                                 : report_path;
      mave::CmdReport(csv, md);
      std::cout << "report: wrote " << md << "\n";
    };

    if (*generate) {
      const mave::GenConfig config = load_config();
      const int rc = Finish("generate", mave::CmdGenerate(config, out_dir, workers));
      mave::WriteRunMetadata(out_dir, "generate", mave::GenConfigHash(config),
                             config.seed, args);
      return rc;
    }
    if (*enhance) {
      int rc = 0;
      for (const auto& e : enhancers)
        rc |= Finish("enhance " + e,
                     mave::CmdEnhance(out_dir, mave::ParseEnhancer(e), workers));
      metadata("enhance");
      return rc;
    }
    if (*render) {
      int rc = 0;
      for (const auto& w : which)
        rc |= Finish("render " + w, mave::CmdRender(out_dir, w, workers));
      metadata("render");
      return rc;
    }
    if (*evaluate) {
      const int rc = Finish("evaluate",
                            mave::CmdEvaluate(out_dir, Keys(enhancers),
                                              mave::ParseDomain(domain), workers));
      metadata("evaluate");
      return rc;
    }
    if (*report) {
      if (out_dir.empty() && csv_path.empty())
        throw mave::Error(mave::ErrorCode::kInvalidArgument,
                          "report needs --out or --csv");
      do_report();
      return 0;
    }
    if (*run) {
      const mave::GenConfig config = load_config();
      const mave::Domain dom = mave::ParseDomain(domain);
      int rc = Finish("generate", mave::CmdGenerate(config, out_dir, workers));
      mave::WriteRunMetadata(out_dir, "run", mave::GenConfigHash(config),
                             config.seed, args);
      for (const auto& e : enhancers)
        rc |= Finish("enhance " + e,
                     mave::CmdEnhance(out_dir, mave::ParseEnhancer(e), workers));
      const auto keys = Keys(enhancers);
      if (dom != mave::Domain::kMicrophone) {
        std::vector<std::string> targets = {"clean", "noisy"};
        targets.insert(targets.end(), keys.begin(), keys.end());
        for (const auto& w : targets)
          rc |= Finish("render " + w, mave::CmdRender(out_dir, w, workers));
      }
      rc |= Finish("evaluate", mave::CmdEvaluate(out_dir, keys, dom, workers));
      do_report();
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
