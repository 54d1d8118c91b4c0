// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// arraysep: synth | train | separate | eval | verify
//
// Exit codes: 0 ok, 1 failure, 2 bad usage.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arraysep/cli/commands.h"
#include "arraysep/cli/run_config.h"

namespace {

using arraysep::cli::RunConfig;

std::string config_help() {
  std::ostringstream s;
  s << "\nConfig keys (--config file lines or --set key=value; later wins):\n";
  for (const auto& k : RunConfig::documented_keys()) {
    s << "  " << k.key << " = " << k.default_value << "\n      " << k.help << "\n";
  }
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Array-geometry-agnostic multi-channel speech separation"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.footer(config_help());

  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "config override key=value (repeatable)");

  auto* synth = app.add_subcommand("synth", "synthesize scenes: WAVs and a manifest under out_dir");
  auto* train = app.add_subcommand("train", "train a model, write checkpoint and log");

  auto* separate = app.add_subcommand("separate", "separate a multi-channel WAV into K mono WAVs");
  arraysep::cli::SeparateOptions sep;
  std::string sep_ckpt, sep_input, sep_out;
  separate->add_option("--checkpoint", sep_ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
  separate->add_option("input", sep_input, "mixture WAV with 1..M channels")->required()->check(CLI::ExistingFile);
  separate->add_option("-o,--out-dir", sep_out, "output directory (default: next to the input)");
  separate->add_option("-r,--reference-channel", sep.reference_channel, "input channel used as reference")
      ->default_val(0);

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a manifest (SI-SDR / SI-SDRi table)");
  arraysep::cli::EvalOptions ev;
  std::string ev_ckpt, ev_manifest;
  bool ev_workers_set = false;
  eval->add_option("--checkpoint", ev_ckpt, "model checkpoint (default: config checkpoint)");
  eval->add_option("--manifest", ev_manifest, "scene manifest (default: config manifest)");
  eval->add_flag("--oracle", ev.oracle, "score the targets themselves (ceiling)");
  eval->add_option("-j,--workers", ev.workers, "parallel scenes (default: config workers)")
      ->each([&](const std::string&) { ev_workers_set = true; });

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  bool quick = false;
  std::string verify_log;
  verify->add_flag("--quick", quick, "skip the training check");
  verify->add_option("--log", verify_log, "training log of the overfit check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    std::vector<std::pair<std::string, std::string>> entries;
    if (!config_file.empty()) entries = arraysep::cli::read_config_file(config_file);
    for (const auto& o : overrides) entries.push_back(arraysep::cli::split_assignment(o));
    config.apply(entries);

    if (*synth) return arraysep::cli::cmd_synth(config, std::cout);
    if (*train) return arraysep::cli::cmd_train(config, std::cout);
    if (*separate) {
      sep.checkpoint = sep_ckpt;
      sep.input = sep_input;
      sep.out_dir = sep_out;
      return arraysep::cli::cmd_separate(sep, std::cout);
    }
    if (*eval) {
      ev.checkpoint = ev_ckpt.empty() ? config.checkpoint_path() : std::filesystem::path(ev_ckpt);
      ev.manifest = ev_manifest.empty() ? config.manifest_path() : std::filesystem::path(ev_manifest);
      if (!ev_workers_set) ev.workers = config.workers;
      return arraysep::cli::cmd_eval(ev, std::cout);
    }
    if (*verify) {
      arraysep::cli::VerifyOptions vo;
      vo.include_training = !quick;
      vo.training_log = verify_log;
      return arraysep::cli::cmd_verify(vo, std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "arraysep: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "arraysep: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
