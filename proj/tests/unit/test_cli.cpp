// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "arraysep/cli/commands.h"
#include "arraysep/cli/run_config.h"
#include "arraysep/dsp/wav.h"
#include "arraysep/sim/scene.h"
#include "arraysep/train/checkpoint.h"
#include "arraysep/train/metrics.h"

namespace cli = arraysep::cli;
namespace dsp = arraysep::dsp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("arraysep_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(RunConfig, ParsesCommentsAndBlankLines) {
  const auto entries = cli::parse_config_text("# header\n\nsteps = 12  # inline\n  lr=0.01\n");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0], (std::pair<std::string, std::string>{"steps", "12"}));
  EXPECT_EQ(entries[1], (std::pair<std::string, std::string>{"lr", "0.01"}));
}

TEST(RunConfig, MalformedLineReportsItsNumber) {
  try {
    cli::parse_config_text("steps=1\nnot an assignment\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, UnknownKeyAndBadNumberRejected) {
  cli::RunConfig c;
  EXPECT_THROW(c.set("stepz", "3"), std::invalid_argument);
  EXPECT_THROW(c.set("steps", "3x"), std::invalid_argument);
  EXPECT_THROW(c.set("workers", "0"), std::invalid_argument);
}

TEST(RunConfig, ScaleIsAppliedBeforeOtherKeys) {
  cli::RunConfig c;
  c.apply({{"embed_dim", "16"}, {"scale", "full"}, {"level_dims", "16,32,64"}});
  EXPECT_EQ(c.model.scale, "full");
  EXPECT_EQ(c.model.embed_dim(), 16u);
  EXPECT_EQ(c.model.separator.conformer.conv_kernel, 15u);
}

TEST(RunConfig, SpeakerCountAndRateReachTheDataset) {
  cli::RunConfig c;
  c.apply({{"num_speakers", "3"}, {"stft.sample_rate", "8000"}, {"t60", "0.4"}});
  EXPECT_EQ(c.dataset.num_speakers, 3u);
  EXPECT_EQ(c.dataset.sample_rate, 8000);
  EXPECT_EQ(*c.dataset.params.t60_s, 0.4);
}

TEST(RunConfig, DefaultPathsLiveUnderOutDir) {
  cli::RunConfig c;
  c.set("out_dir", "runs/a");
  EXPECT_EQ(c.manifest_path(), fs::path("runs/a/manifest.txt"));
  EXPECT_EQ(c.checkpoint_path(), fs::path("runs/a/model.ckpt"));
  c.set("checkpoint", "elsewhere.ckpt");
  EXPECT_EQ(c.checkpoint_path(), fs::path("elsewhere.ckpt"));
}

TEST(RunConfig, EveryDocumentedKeyIsAccepted) {
  for (const auto& k : cli::RunConfig::documented_keys()) {
    cli::RunConfig c;
    std::string value = k.default_value;
    if (value.rfind("random", 0) == 0) value = k.key == "snr" ? "15" : "0.5";
    if (value.front() == '<') value = "x";
    EXPECT_NO_THROW(c.set(k.key, value)) << k.key << "=" << value;
  }
}

TEST(Commands, RotateChannels) {
  dsp::Waveform w(16000, 3, 2);
  for (std::size_t c = 0; c < 3; ++c) w.channels[c] = {double(c), double(c)};
  const auto r = cli::rotate_channels(w, 2);
  EXPECT_EQ(r.channels[0][0], 2.0);
  EXPECT_EQ(r.channels[1][0], 0.0);
  EXPECT_EQ(r.channels[2][0], 1.0);
  EXPECT_THROW(cli::rotate_channels(w, 3), std::invalid_argument);
}

TEST(Commands, SeparateTwoChannelFileIntoMonoWavs) {
  const fs::path dir = fresh_dir("separate");
  const arraysep::pipeline::SeparationModel<float> model(arraysep::pipeline::ModelConfig::toy());
  const fs::path ckpt = dir / "m.ckpt";
  arraysep::train::save_checkpoint(ckpt.string(), model, 0);

  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  dsp::Waveform w(16000, 2, 4321);
  for (auto& ch : w.channels)
    for (auto& x : ch) x = u(eng);
  const fs::path input = dir / "mix.wav";
  dsp::write_wav(input, w);

  cli::SeparateOptions opt;
  opt.checkpoint = ckpt;
  opt.input = input;
  opt.out_dir = dir / "out";
  opt.reference_channel = 1;
  std::ostringstream out;
  std::vector<fs::path> written;
  EXPECT_EQ(cli::cmd_separate(opt, out, &written), 0);
  ASSERT_EQ(written.size(), 2u);
  EXPECT_EQ(written[0].filename(), "mix_s0.wav");
  for (const auto& p : written) {
    const auto r = dsp::read_wav(p);
    EXPECT_EQ(r.num_channels(), 1u);
    EXPECT_EQ(r.num_samples(), 4321u);
  }
  opt.reference_channel = 2;
  EXPECT_THROW(cli::cmd_separate(opt, out), std::invalid_argument);
}

TEST(Commands, OracleEvalGivesCeilingMinusMixtureScore) {
  const fs::path dir = fresh_dir("eval");
  cli::RunConfig c;
  c.apply({{"out_dir", dir.string()}, {"num_scenes", "2"}, {"duration_s", "0.5"}});
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_synth(c, log), 0);
  const auto entries = arraysep::sim::read_manifest(c.manifest_path());
  ASSERT_EQ(entries.size(), 2u);

  cli::EvalOptions ev;
  ev.manifest = c.manifest_path();
  ev.oracle = true;
  ev.workers = 2;
  std::vector<cli::EvalRow> rows;
  std::ostringstream table;
  ASSERT_EQ(cli::cmd_eval(ev, table, &rows), 0);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto mix = dsp::read_wav(dir / entries[i].mixture);
    double mix_score = 0.0;
    for (const auto& t : entries[i].targets) {
      mix_score += arraysep::train::si_sdr(mix.channels[0], dsp::read_wav(dir / t).channels[0]);
    }
    mix_score /= static_cast<double>(entries[i].targets.size());
    EXPECT_EQ(rows[i].id, entries[i].id);
    EXPECT_NEAR(rows[i].si_sdr, 30.0, 1e-9);
    EXPECT_NEAR(rows[i].si_sdri, 30.0 - mix_score, 1e-9);
  }
  EXPECT_NE(table.str().find("mean"), std::string::npos);
}
