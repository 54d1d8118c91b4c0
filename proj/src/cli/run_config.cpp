// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/cli/run_config.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arraysep::cli {

namespace {

template <typename Number>
Number parse_number(const std::string& key, const std::string& text) {
  Number v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw std::invalid_argument(key + ": cannot parse '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Model keys are forwarded verbatim to ModelConfig::set.
const std::vector<ConfigKey>& model_keys() {
  static const std::vector<ConfigKey> keys = {
      {"scale", "toy", "toy (E=8) or full (E=64); resets every model key, so it is applied first"},
      {"max_channels", "8", "M, channels after augmentation"},
      {"augment", "vme", "vme or zero_pad"},
      {"spatial", "sdl", "sdl, fsdl or off (plane concatenation)"},
      {"inner_product", "hermitian", "hermitian or transpose"},
      {"normalize_input", "true", "divide the input by the reference RMS magnitude"},
      {"seed", "1", "model initialization seed"},
      {"stft.window_len_s", "0.032", "analysis window"},
      {"stft.shift_s", "0.016", "hop"},
      {"stft.sample_rate", "16000", "also the synthesis rate"},
      {"embed_dim", "8", "E"},
      {"reference_channel", "0", "channel fed to the spectral branch"},
      {"extractor_kernel", "5", "local pattern extractor kernel"},
      {"aff_bottleneck_ratio", "4", "channel attention reduction"},
      {"aff_iterations", "2", "attentional fusion stages"},
      {"merge_windows", "1,2,2", "patch merge window per level"},
      {"level_dims", "8,16,32", "feature size per level"},
      {"num_speakers", "2", "K, also the number of sources per synthetic scene"},
      {"num_heads", "4", "attention heads"},
      {"ff_expansion", "4", "Conformer feed-forward expansion"},
      {"conv_kernel", "7", "Conformer depthwise kernel"},
      {"layers_per_path", "1", "Conformer layers per dual-path axis"},
      {"skip_connections", "true", "encoder-decoder skips"},
      {"bottleneck_block", "true", "dual-path block between encoder and decoder"},
      {"decoder_dual_path", "true", "dual-path block after every expand"},
  };
  return keys;
}

bool is_model_key(const std::string& key) {
  for (const auto& k : model_keys()) {
    if (k.key == key) return true;
  }
  return false;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (is_model_key(key)) {
    model.set(key, value);
    if (key == "num_speakers") dataset.num_speakers = model.separator.num_speakers;
    if (key == "stft.sample_rate") dataset.sample_rate = model.stft.sample_rate;
  } else if (key == "geometry") {
    dataset.geometry = value;
  } else if (key == "num_scenes") {
    dataset.num_scenes = parse_number<std::size_t>(key, value);
  } else if (key == "duration_s") {
    dataset.duration_s = parse_number<double>(key, value);
  } else if (key == "data_seed") {
    dataset.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "t60") {
    dataset.params.t60_s = parse_number<double>(key, value);
  } else if (key == "snr") {
    dataset.params.snr_db = parse_number<double>(key, value);
  } else if (key == "overlap") {
    dataset.params.overlap_ratio = parse_number<double>(key, value);
  } else if (key == "lr") {
    train.lr = parse_number<double>(key, value);
  } else if (key == "steps") {
    train.steps = parse_number<std::size_t>(key, value);
  } else if (key == "batch_size") {
    train.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "train_seed") {
    train.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "grad_clip_norm") {
    train.grad_clip_norm = parse_number<double>(key, value);
  } else if (key == "loss_clamp_db") {
    train.loss_clamp_db = parse_number<double>(key, value);
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "manifest") {
    manifest = value;
  } else if (key == "checkpoint") {
    checkpoint = value;
  } else if (key == "log") {
    log = value;
  } else if (key == "workers") {
    workers = parse_number<std::size_t>(key, value);
    if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void RunConfig::apply(const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [k, v] : entries) {
    if (k == "scale") set(k, v);
  }
  for (const auto& [k, v] : entries) {
    if (k != "scale") set(k, v);
  }
}

std::filesystem::path RunConfig::manifest_path() const {
  return manifest.empty() ? out_dir / "manifest.txt" : manifest;
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_dir / "model.ckpt" : checkpoint;
}

std::filesystem::path RunConfig::log_path() const {
  return log.empty() ? out_dir / "train_log.jsonl" : log;
}

std::vector<ConfigKey> RunConfig::documented_keys() {
  std::vector<ConfigKey> keys = model_keys();
  const std::vector<ConfigKey> rest = {
      {"geometry", "L-2-5", "array label, C-<n>-<cm> or L-<n>-<cm>, optional {i,j,..} subset"},
      {"num_scenes", "3", "synthetic scenes"},
      {"duration_s", "2", "seconds per source"},
      {"data_seed", "100", "scene synthesis seed"},
      {"t60", "random 0.1-1.0", "reverberation time in seconds"},
      {"snr", "random 10-20", "mixture to diffuse noise ratio in dB"},
      {"overlap", "random 0.1-1.0", "speaker overlap ratio"},
      {"lr", "0.001", "Adam learning rate"},
      {"steps", "500", "optimizer steps"},
      {"batch_size", "1", "scenes per step"},
      {"train_seed", "1", "trainer seed"},
      {"grad_clip_norm", "5", "global gradient norm ceiling, 0 disables"},
      {"loss_clamp_db", "30", "SI-SDR clamp"},
      {"out_dir", "arraysep_out", "output directory"},
      {"manifest", "<out_dir>/manifest.txt", "scene manifest"},
      {"checkpoint", "<out_dir>/model.ckpt", "model checkpoint"},
      {"log", "<out_dir>/train_log.jsonl", "training log"},
      {"workers", "1", "parallel scenes in eval"},
  };
  keys.insert(keys.end(), rest.begin(), rest.end());
  return keys;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + text + "'");
  const std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw std::invalid_argument("empty key in '" + text + "'");
  return {key, trim(text.substr(eq + 1))};
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      out.push_back(split_assignment(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace arraysep::cli
