#include "hvc/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "hvc/attack.h"
#include "hvc/channel.h"
#include "hvc/dsp.h"
#include "hvc/errors.h"
#include "hvc/features.h"
#include "hvc/perturbation.h"
#include "hvc/remote.h"
#include "hvc/spectrogram.h"
#include "hvc/vad.h"

namespace hvc {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::uint64_t seed = 42;
  bool resample_input = false;
  bool float32 = false;

  std::string input;
  std::string input_b;
  std::string output;

  std::optional<double> tdi_ms;
  std::optional<double> rpg_ms;
  std::string hfa;
  std::optional<double> ts;

  std::string tdi_range;
  std::string rpg_range;
  std::string ts_range;

  bool mfsc = false;
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  int filters = 26;
  int coeffs = 13;
  std::string window = "hamming";
  bool magnitude_spectrum = false;
  double pre_emphasis = 0.0;

  double compare_window_ms = 20.0;
  std::string channel;

  std::string target_phrase;
  std::string backend;
  std::size_t budget = kDefaultQueryBudget;
  std::vector<std::size_t> word_boundaries;
  bool split_vad = false;
  std::size_t variants = 1;

  double range_db = 80.0;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

AudioBuffer load_input(const std::string& path, const Options& opt) {
  AudioBuffer a = load_wav(path);
  if (a.sample_rate != kCanonicalRate) {
    if (!opt.resample_input)
      throw std::runtime_error(path + " is " + std::to_string(a.sample_rate) +
                               " Hz; pass --resample to convert to 16000 Hz");
    a = resample(a, kCanonicalRate);
  }
  return a;
}

std::vector<HfaComponent> parse_hfa(const std::string& text) {
  std::vector<HfaComponent> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParameterError("--hfa expects F:A[,F:A...]");
    try {
      out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw ParameterError("--hfa expects numeric F:A pairs, got '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_range(const std::string& text, const char* flag) {
  if (text.empty()) return {};
  std::istringstream in(text);
  std::string a, b, c;
  if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c))
    throw ParameterError(std::string(flag) + " expects START:STOP:STEP");
  try {
    return linear_schedule(std::stod(a), std::stod(b), std::stod(c));
  } catch (const std::logic_error& e) {
    throw ParameterError(std::string(flag) + ": " + e.what());
  }
}

PerturbationParams single_params(const Options& opt) {
  PerturbationParams p;
  p.tdi_window_ms = opt.tdi_ms;
  p.rpg_window_ms = opt.rpg_ms;
  p.rpg_seed = opt.seed;
  p.hfa_components = parse_hfa(opt.hfa);
  p.ts_factor_percent = opt.ts;
  return p;
}

ParamRanges ranges_from(const Options& opt) {
  ParamRanges r;
  r.tdi_window_ms = parse_range(opt.tdi_range, "--tdi-ms-range");
  r.rpg_window_ms = parse_range(opt.rpg_range, "--rpg-ms-range");
  r.ts_factor_percent = parse_range(opt.ts_range, "--ts-range");
  if (!opt.hfa.empty()) r.hfa_sets.push_back(parse_hfa(opt.hfa));
  r.rpg_seed = opt.seed;
  return r;
}

FeatureConfig feature_config(const Options& opt) {
  FeatureConfig c;
  c.frame_ms = opt.frame_ms;
  c.hop_ms = opt.hop_ms;
  c.n_mel_filters = opt.filters;
  c.n_coefficients = opt.coeffs;
  c.include_dct = !opt.mfsc;
  c.pre_emphasis = opt.pre_emphasis;
  c.spectrum = opt.magnitude_spectrum ? SpectrumKind::kMagnitude : SpectrumKind::kPower;
  if (opt.window == "hamming")
    c.window = AnalysisWindow::kHamming;
  else if (opt.window == "rectangular")
    c.window = AnalysisWindow::kRectangular;
  else
    throw ParameterError("--window must be hamming or rectangular");
  return c;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int cmd_perturb(const Options& opt, std::ostream& out) {
  const auto audio = load_input(opt.input, opt);
  const auto result = perturb(audio, single_params(opt));
  save_wav(opt.output, result.audio, opt.float32);
  if (result.hfa_scale != 1.0) out << "hfa_scale\t" << fmt9(result.hfa_scale) << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  const auto audio = load_input(opt.input, opt);
  const auto grid = expand_grid(ranges_from(opt));
  fs::create_directories(opt.output);
  std::string manifest;
  char name[32];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(name, sizeof name, "sweep_%04zu.wav", i);
    save_wav((fs::path(opt.output) / name).string(), perturb(audio, grid[i]).audio, opt.float32);
    manifest += std::string(name) + '\t' + format_params(grid[i]) + '\n';
  }
  const auto manifest_path = (fs::path(opt.output) / "manifest.tsv").string();
  write_bytes(manifest_path, std::vector<std::uint8_t>(manifest.begin(), manifest.end()));
  out << grid.size() << " files\t" << manifest_path << '\n';
  return kExitOk;
}

int cmd_features(const Options& opt, std::ostream& out) {
  out << format_feature_matrix(extract_features(load_input(opt.input, opt), feature_config(opt)));
  return kExitOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  const auto a = load_input(opt.input, opt);
  const auto b = load_input(opt.input_b, opt);
  const auto config = feature_config(opt);
  const double d = feature_distance(extract_features(a, config), extract_features(b, config));
  const double m = max_window_magnitude_difference(
      a, b, window_samples(opt.compare_window_ms, a.sample_rate));
  out << "feature_distance\t" << fmt9(d) << '\n';
  out << "max_magnitude_rel_diff\t" << fmt9(m) << '\n';
  return kExitOk;
}

int cmd_vad(const Options& opt, std::ostream& out) {
  out << format_regions(detect_speech(load_input(opt.input, opt)));
  return kExitOk;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const auto audio = load_input(opt.input, opt);
  ChannelConfig config;
  if (opt.channel == "transparent" || opt.channel == "harsh") {
    config = channel_preset(opt.channel, audio.sample_rate);
    config.noise_seed = opt.seed;
  } else {
    config = parse_channel_config(read_text(opt.channel), audio.sample_rate);
  }
  const auto result = simulate(audio, config);
  save_wav(opt.output, result.audio, opt.float32);
  if (result.scale != 1.0) out << "renormalized\t" << fmt9(result.scale) << '\n';
  return kExitOk;
}

std::unique_ptr<TranscriberBackend> make_backend(const Options& opt) {
  if (opt.backend.rfind("mock:", 0) == 0) {
    const std::string rest = opt.backend.substr(5);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos)
      throw ParameterError("--backend mock expects mock:REF.wav:THRESHOLD");
    const auto reference = load_input(rest.substr(0, colon), opt);
    const std::string thr = rest.substr(colon + 1);
    double threshold = 0.0;
    try {
      threshold = thr == "inf" ? std::numeric_limits<double>::infinity() : std::stod(thr);
    } catch (const std::logic_error&) {
      throw ParameterError("bad mock threshold '" + thr + "'");
    }
    return std::make_unique<MockOracle>(reference, opt.target_phrase, threshold, opt.budget);
  }
  if (opt.backend.rfind("remote:", 0) == 0) {
    auto config = parse_remote_config(read_text(opt.backend.substr(7)));
    if (!opt.target_phrase.empty()) config.target_phrase = opt.target_phrase;
    return remote_transcriber(config);
  }
  throw ParameterError("--backend must be mock:REF.wav:THRESHOLD or remote:CONFIG");
}

int cmd_attack(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto audio = load_input(opt.input, opt);
  auto backend = make_backend(opt);
  auto ranges = ranges_from(opt);
  if (ranges.tdi_window_ms.empty() && ranges.rpg_window_ms.empty())
    ranges.tdi_window_ms = default_window_schedule();
  const auto schedule = expand_grid(ranges);

  AttackOutcome outcome;
  if (opt.split_vad || !opt.word_boundaries.empty()) {
    const auto words = opt.split_vad ? split_words_by_vad(audio)
                                     : split_words(audio, opt.word_boundaries);
    ImprovedAttackOptions io;
    io.variants_per_word = opt.variants;
    outcome = improved_attack(words, *backend, schedule, io);
  } else {
    outcome = generic_attack(audio, *backend, schedule);
  }

  if (!outcome.accepted) {
    err << "no accepted candidate after " << outcome.queries() << " queries"
        << (outcome.budget_exhausted ? " (budget exhausted)" : "") << '\n';
    out << "queries\t" << outcome.queries() << '\n';
    return kExitFailure;
  }
  fs::create_directories(opt.output);
  const auto path = (fs::path(opt.output) / "attack_winner.wav").string();
  save_wav(path, outcome.accepted->audio);
  out << "winner\t" << path << '\n';
  out << "params\t" << format_params(outcome.accepted->params) << '\n';
  out << "transcript\t" << outcome.accepted->verdict->transcript << '\n';
  out << "queries\t" << outcome.queries() << '\n';
  return kExitOk;
}

int cmd_spectrogram(const Options& opt, std::ostream&) {
  const auto spec = stft_db(load_input(opt.input, opt), opt.frame_ms, opt.hop_ms);
  write_bytes(opt.output, spectrogram_pgm(spec, opt.range_db));
  return kExitOk;
}

void add_perturbation_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--tdi-ms", opt.tdi_ms, "time-domain inversion window (ms)");
  cmd->add_option("--rpg-ms", opt.rpg_ms, "random phase generation window (ms)");
  cmd->add_option("--hfa", opt.hfa, "high-frequency tones F:A[,F:A...]");
  cmd->add_option("--ts", opt.ts, "time-scaling factor in percent (>= 100)");
}

void add_range_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--tdi-ms-range", opt.tdi_range, "START:STOP:STEP");
  cmd->add_option("--rpg-ms-range", opt.rpg_range, "START:STOP:STEP");
  cmd->add_option("--ts-range", opt.ts_range, "START:STOP:STEP");
  cmd->add_option("--hfa", opt.hfa, "fixed high-frequency tones F:A[,F:A...]");
}

void add_feature_flags(CLI::App* cmd, Options& opt) {
  cmd->add_flag("--mfsc", opt.mfsc, "log mel energies without the DCT");
  cmd->add_option("--frame-ms", opt.frame_ms, "analysis frame (ms)");
  cmd->add_option("--hop-ms", opt.hop_ms, "frame hop (ms)");
  cmd->add_option("--filters", opt.filters, "mel filter count");
  cmd->add_option("--coeffs", opt.coeffs, "cepstral coefficient count");
  cmd->add_option("--window", opt.window, "hamming | rectangular");
  cmd->add_flag("--magnitude", opt.magnitude_spectrum, "feed magnitudes, not power");
  cmd->add_option("--pre-emphasis", opt.pre_emphasis, "pre-emphasis coefficient");
}

}  // namespace

double max_window_magnitude_difference(const AudioBuffer& a, const AudioBuffer& b,
                                       std::size_t window) {
  if (window == 0) throw ParameterError("window must be at least one sample");
  const std::size_t n = std::min(a.size(), b.size());
  const std::span<const double> xa(a.samples), xb(b.samples);
  double worst = 0.0;
  for (std::size_t start = 0; start < n; start += window) {
    const std::size_t len = std::min(window, n - start);
    const auto ma = magnitude(dft_real_exact(xa.subspan(start, len)));
    const auto mb = magnitude(dft_real_exact(xb.subspan(start, len)));
    double peak = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < ma.size(); ++k) {
      peak = std::max(peak, ma[k]);
      diff = std::max(diff, std::abs(ma[k] - mb[k]));
    }
    if (diff == 0.0) continue;
    worst = std::max(worst, peak > 0.0 ? diff / peak : std::numeric_limits<double>::infinity());
  }
  return worst;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hidden voice command perturbation toolkit", "hvc"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--seed", opt.seed, "seed for RPG and channel noise")->capture_default_str();
  app.add_flag("--resample", opt.resample_input, "resample non-16 kHz input to 16 kHz");

  auto* perturb_cmd = app.add_subcommand("perturb", "apply perturbations to one file");
  perturb_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  perturb_cmd->add_option("out", opt.output)->required();
  add_perturbation_flags(perturb_cmd, opt);
  perturb_cmd->add_flag("--float32", opt.float32, "write 32-bit float WAV");

  auto* sweep_cmd = app.add_subcommand("sweep", "write one WAV per parameter-grid point");
  sweep_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("outdir", opt.output)->required();
  add_range_flags(sweep_cmd, opt);
  sweep_cmd->add_flag("--float32", opt.float32, "write 32-bit float WAVs");

  auto* features_cmd = app.add_subcommand("features", "print MFCC/MFSC matrix");
  features_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  add_feature_flags(features_cmd, opt);

  auto* compare_cmd = app.add_subcommand("compare", "feature distance and spectrum agreement");
  compare_cmd->add_option("a", opt.input)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("b", opt.input_b)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--window-ms", opt.compare_window_ms, "magnitude comparison window");
  add_feature_flags(compare_cmd, opt);

  auto* vad_cmd = app.add_subcommand("vad", "print detected speech regions");
  vad_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);

  auto* simulate_cmd = app.add_subcommand("simulate", "pass audio through a channel model");
  simulate_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("out", opt.output)->required();
  simulate_cmd->add_option("--channel", opt.channel, "transparent | harsh | config file")
      ->required();
  simulate_cmd->add_flag("--float32", opt.float32, "write 32-bit float WAV");

  auto* attack_cmd = app.add_subcommand("attack", "query-budgeted attack search");
  attack_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--target-phrase", opt.target_phrase)->required();
  attack_cmd->add_option("--backend", opt.backend, "mock:REF.wav:THRESHOLD | remote:CONFIG")
      ->required();
  attack_cmd->add_option("--out-dir", opt.output, "where the winning WAV goes")
      ->default_val(".");
  attack_cmd->add_option("--budget", opt.budget, "maximum backend queries");
  attack_cmd->add_option("--word-boundaries", opt.word_boundaries,
                         "sample indices splitting words (improved attack)")
      ->delimiter(',');
  attack_cmd->add_flag("--split-vad", opt.split_vad, "split words at VAD regions");
  attack_cmd->add_option("--variants", opt.variants, "settings kept per word");
  add_range_flags(attack_cmd, opt);

  auto* spec_cmd = app.add_subcommand("spectrogram", "write a log-magnitude STFT as PGM");
  spec_cmd->add_option("in", opt.input)->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("out", opt.output)->required();
  spec_cmd->add_option("--frame-ms", opt.frame_ms);
  spec_cmd->add_option("--hop-ms", opt.hop_ms);
  spec_cmd->add_option("--range-db", opt.range_db);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (perturb_cmd->parsed()) return cmd_perturb(opt, out);
    if (sweep_cmd->parsed()) return cmd_sweep(opt, out);
    if (features_cmd->parsed()) return cmd_features(opt, out);
    if (compare_cmd->parsed()) return cmd_compare(opt, out);
    if (vad_cmd->parsed()) return cmd_vad(opt, out);
    if (simulate_cmd->parsed()) return cmd_simulate(opt, out);
    if (attack_cmd->parsed()) return cmd_attack(opt, out, err);
    if (spec_cmd->parsed()) return cmd_spectrogram(opt, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("hvc");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hvc
