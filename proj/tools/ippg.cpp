// Command-line front end: synth, extract, train, infer, evaluate, prv.
// Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "ippg/error.hpp"
#include "ippg/estimation.hpp"
#include "ippg/evaluation.hpp"
#include "ippg/io/formats.hpp"
#include "ippg/io/frames.hpp"
#include "ippg/io/manifest.hpp"
#include "ippg/io/pipeline.hpp"
#include "ippg/splits.hpp"
#include "ippg/turnip/checkpoint.hpp"
#include "ippg/turnip/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ippg;

namespace {

// Files created by the running command; removed unless the command commits.
class OutputGuard {
 public:
  void add(const fs::path& p) {
    if (!p.empty()) paths_.push_back(p);
  }
  void commit() { paths_.clear(); }
  ~OutputGuard() {
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove_all(*it, ec);
  }

 private:
  std::vector<fs::path> paths_;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

io::PipelineConfig load_config(const Common& c) {
  io::PipelineConfig cfg = c.config.empty() ? io::PipelineConfig{} : io::read_pipeline_config(c.config);
  if (c.seed) {
    cfg.train.seed = *c.seed;
    cfg.turnip.seed = *c.seed;
  }
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Pipeline config JSON");
  app->add_option("--seed", c.seed, "Seed for every random choice");
}

int exit_code(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 3;
}

io::Method parse_method(const std::string& m) {
  if (m == "turnip") return io::Method::Turnip;
  if (m == "chrom") return io::Method::Chrom;
  if (m == "pos") return io::Method::Pos;
  throw Error(ErrorCode::Usage, "unknown method '" + m + "'");
}

std::size_t parse_group(const std::string& w, const io::PipelineConfig& cfg) {
  const auto seconds = [&w] {
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used + 1 == w.size() && w.back() == 's') return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::Usage, "--windows expects a duration such as 10s or 30s");
  }();
  const double ratio = seconds / cfg.window_s;
  if (ratio < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw Error(ErrorCode::Usage, "--windows must be a whole multiple of the network window");
  }
  return std::size_t(std::llround(ratio));
}

void log_epoch(const turnip::EpochRecord& e) {
  std::fprintf(stderr, "epoch %d lr %.6g mean_loss %.6f (%.1f s)\n", e.epoch, e.lr, e.mean_loss, e.wall_time);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imaging photoplethysmography pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Render a synthetic video corpus");
  std::string synth_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  io::SynthCorpusConfig corpus;
  synth->add_option("--config", synth_config, "Corpus config JSON");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--videos", corpus.videos, "Number of videos");
  synth->add_option("--subjects", corpus.subjects, "Number of subjects");
  synth->add_option("--duration", corpus.base.duration_s, "Seconds per video");
  synth->add_option("--fps", corpus.base.fps, "Frame rate");
  synth->add_option("--hr-min", corpus.hr_min, "Lowest heart rate (bpm)");
  synth->add_option("--hr-max", corpus.hr_max, "Highest heart rate (bpm)");
  synth->add_option("--motion", corpus.base.motion_px, "Rigid jitter amplitude (px)");
  synth->add_option("--noise", corpus.base.noise_std, "Pixel noise std (8-bit levels)");
  synth->add_option("--seed", synth_seed, "Seed");

  // extract
  auto* extract = app.add_subcommand("extract", "Frames and landmarks to a region series");
  Common extract_common;
  add_common(extract, extract_common);
  std::string ex_frames, ex_landmarks, ex_out, ex_manifest, ex_mode;
  std::optional<int> ex_smooth;
  std::optional<double> ex_sentinel;
  extract->add_option("--frames", ex_frames, "Raw frame container");
  extract->add_option("--landmarks", ex_landmarks, "Landmark JSON lines");
  extract->add_option("--out", ex_out, "Output series file (or manifest when --manifest is given)");
  extract->add_option("--manifest", ex_manifest, "Extract every video of a manifest");
  extract->add_option("--channel-mode", ex_mode, "red | green | blue | rog | rgb");
  extract->add_option("--smooth-landmarks", ex_smooth, "Landmark moving-average window (frames)");
  extract->add_option("--sentinel", ex_sentinel, "Value written into occluded regions");

  // train
  auto* train = app.add_subcommand("train", "Train the denoiser on a manifest");
  Common train_common;
  add_common(train, train_common);
  std::string tr_manifest, tr_out, tr_log;
  std::vector<std::string> tr_videos;
  std::optional<int> tr_epochs;
  train->add_option("--manifest", tr_manifest, "Dataset manifest")->required();
  train->add_option("--videos", tr_videos, "Video ids to train on (default: all)");
  train->add_option("--out", tr_out, "Checkpoint path")->required();
  train->add_option("--log", tr_log, "Training log (JSON lines)");
  train->add_option("--epochs", tr_epochs, "Override the epoch count");

  // infer
  auto* infer = app.add_subcommand("infer", "Run a checkpoint on a region series");
  Common infer_common;
  add_common(infer, infer_common);
  std::string in_ckpt, in_series, in_out;
  infer->add_option("--checkpoint", in_ckpt, "Checkpoint")->required();
  infer->add_option("--series", in_series, "Raw region series")->required();
  infer->add_option("--out", in_out, "Output waveform JSON")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Heart-rate evaluation over a manifest");
  Common eval_common;
  add_common(evaluate, eval_common);
  std::string ev_manifest, ev_method = "turnip", ev_ckpt, ev_split = "all", ev_partition = "high", ev_windows,
                           ev_out, ev_ba, ev_trainlog;
  evaluate->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
  evaluate->add_option("--method", ev_method, "turnip | chrom | pos");
  evaluate->add_option("--checkpoint", ev_ckpt, "Checkpoint for the network method");
  evaluate->add_option("--split", ev_split, "all | loso | motion | labels");
  evaluate->add_option("--partition", ev_partition, "high | low, for motion and label splits");
  evaluate->add_option("--windows", ev_windows, "Evaluation window, e.g. 10s or 30s");
  evaluate->add_option("--out", ev_out, "Report path (default: stdout)");
  evaluate->add_option("--bland-altman", ev_ba, "Bland-Altman table path");

  // prv
  auto* prv = app.add_subcommand("prv", "Pulse-rate variability of waveform files");
  std::vector<std::string> prv_waves;
  std::string prv_out;
  prv->add_option("waves", prv_waves, "Waveform JSON files")->required();
  prv->add_option("--out", prv_out, "Write records here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  OutputGuard guard;
  try {
    if (*synth) {
      if (!synth_config.empty()) corpus = io::synth_corpus_config_from_json(io::read_text(synth_config));
      if (synth_seed) corpus.seed = *synth_seed;
      if (corpus.subjects == 0 || corpus.subjects > corpus.videos) {
        throw Error(ErrorCode::Usage, "need 1 <= subjects <= videos");
      }
      if (!fs::exists(synth_out)) guard.add(synth_out);
      const auto m = io::write_synth_corpus(corpus, synth_out);
      std::cout << json{{"videos", m.videos.size()}, {"manifest", (fs::path(synth_out) / "manifest.json").string()}}.dump()
                << "\n";
    } else if (*extract) {
      io::PipelineConfig cfg = load_config(extract_common);
      if (!ex_mode.empty()) cfg.channel_mode = ex_mode;
      if (ex_smooth) cfg.smooth_landmarks = *ex_smooth;
      if (ex_sentinel) cfg.sentinel = *ex_sentinel;
      const ChannelMode mode = ChannelMode::parse(cfg.channel_mode);
      if (!ex_manifest.empty()) {
        io::DatasetManifest m = io::read_manifest(ex_manifest);
        m.check_files();
        const fs::path out = ex_out.empty() ? fs::path(ex_manifest) : fs::path(ex_out);
        for (auto& v : m.videos) {
          v.series = v.entry.video_id + "." + cfg.channel_mode + ".series";
          guard.add(m.resolve(v.series));
          const io::FileFrameSource frames(m.resolve(v.frames));
          mode.validate(frames.channels());
          io::write_region_series(m.resolve(v.series),
                                  io::extract_video(frames, io::read_landmarks(m.resolve(v.landmarks)), mode,
                                                    cfg.smooth_landmarks, cfg.sentinel));
        }
        if (out != fs::path(ex_manifest)) guard.add(out);
        io::write_manifest(out, m);
        std::cout << json{{"videos", m.videos.size()}, {"manifest", out.string()}}.dump() << "\n";
      } else {
        if (ex_frames.empty() || ex_landmarks.empty() || ex_out.empty()) {
          throw Error(ErrorCode::Usage, "extract needs --frames, --landmarks and --out (or --manifest)");
        }
        const io::FileFrameSource frames(ex_frames);
        mode.validate(frames.channels());
        io::ExtractReport report;
        guard.add(ex_out);
        const RegionSeries s = io::extract_video(frames, io::read_landmarks(ex_landmarks), mode,
                                                 cfg.smooth_landmarks, cfg.sentinel, &report);
        io::write_region_series(ex_out, s);
        std::cout << json{{"frames", s.frames},
                          {"regions", s.regions},
                          {"channels", s.channels},
                          {"sentinel_cells", s.sentinel_count()},
                          {"warnings", report.augmentation_warnings + report.extraction_warnings}}
                         .dump()
                  << "\n";
      }
    } else if (*train) {
      io::PipelineConfig cfg = load_config(train_common);
      if (tr_epochs) cfg.train.epochs = *tr_epochs;
      const io::DatasetManifest m = io::read_manifest(tr_manifest);
      std::vector<std::string> ids = tr_videos;
      if (ids.empty()) {
        for (const auto& v : m.videos) ids.push_back(v.entry.video_id);
      }
      const WindowSet windows = io::manifest_windows(m, ids, cfg);
      turnip::TurnipConfig tc = cfg.turnip;
      tc.window_length = int(windows.length);
      tc.input_channels = int(windows.windows.front().data.signal_count());
      turnip::TrainLog log;
      guard.add(tr_out);
      const auto params = turnip::train(windows, tc, cfg.train, &log, nullptr, log_epoch);
      turnip::save_checkpoint(params, tc, tr_out);
      if (!tr_log.empty()) {
        guard.add(tr_log);
        io::write_text(tr_log, log.to_json_lines());
      }
      std::cout << json{{"windows", windows.windows.size()},
                        {"initial_loss", log.initial_loss},
                        {"final_loss", log.epochs.empty() ? log.initial_loss : log.epochs.back().mean_loss}}
                       .dump()
                << "\n";
    } else if (*infer) {
      const io::PipelineConfig cfg = load_config(infer_common);
      const turnip::Checkpoint ck = turnip::load_checkpoint(in_ckpt);
      const RegionSeries raw = io::read_region_series(in_series);
      if (int(raw.signal_count()) != ck.config.input_channels) {
        throw Error(ErrorCode::ShapeMismatch, "series has " + std::to_string(raw.signal_count()) +
                                                  " signals, checkpoint expects " +
                                                  std::to_string(ck.config.input_channels));
      }
      const RegionSeries prepared = preprocess_series(raw, cfg.preprocess);
      const auto outputs = io::infer_windows(prepared, ck.params, ck.config);
      if (outputs.empty()) throw Error(ErrorCode::SeriesTooShort, "series shorter than one network window");
      const PulseWaveform wave = concat_windows(outputs);
      guard.add(in_out);
      io::write_waveform(in_out, wave);
      json hrs = json::array();
      for (const auto& w : outputs) hrs.push_back(estimate_hr(w).bpm);
      std::cout << json{{"windows", outputs.size()}, {"hr_bpm", estimate_hr(wave).bpm}, {"window_hr_bpm", hrs}}.dump()
                << "\n";
    } else if (*evaluate) {
      const io::PipelineConfig cfg = load_config(eval_common);
      const io::Method method = parse_method(ev_method);
      const io::DatasetManifest m = io::read_manifest(ev_manifest);
      const std::size_t group = ev_windows.empty() ? 1 : parse_group(ev_windows, cfg);
      std::optional<turnip::Checkpoint> ck;
      if (!ev_ckpt.empty()) ck = turnip::load_checkpoint(ev_ckpt);
      if (method == io::Method::Turnip && !ck && ev_split != "loso") {
        throw Error(ErrorCode::Usage, "the network method needs --checkpoint unless --split loso trains per fold");
      }

      std::vector<const io::ManifestVideo*> videos;
      for (const auto& v : m.videos) videos.push_back(&v);
      if (ev_split == "motion" || ev_split == "labels") {
        const Partition p = ev_split == "motion" ? motion_split(m.entries()) : label_split(m.entries());
        const auto& keep = ev_partition == "low" ? p.low : p.high;
        std::erase_if(videos, [&keep](const io::ManifestVideo* v) {
          return std::find(keep.begin(), keep.end(), v->entry.video_id) == keep.end();
        });
      } else if (ev_split != "all" && ev_split != "loso") {
        throw Error(ErrorCode::Usage, "unknown split '" + ev_split + "'");
      }

      std::vector<EvalRecord> records;
      auto run = [&](const io::ManifestVideo& v, const turnip::TurnipParams* params, const io::PipelineConfig& c) {
        auto r = io::evaluate_video(m, v, method, c, params, group);
        records.insert(records.end(), r.begin(), r.end());
      };
      if (ev_split == "loso" && method == io::Method::Turnip && !ck) {
        for (const auto& fold : leave_one_subject_out(m.entries()).folds) {
          const WindowSet windows = io::manifest_windows(m, fold.train, cfg);
          turnip::TurnipConfig tc = cfg.turnip;
          tc.window_length = int(windows.length);
          tc.input_channels = int(windows.windows.front().data.signal_count());
          std::fprintf(stderr, "fold %s: %zu training windows\n", fold.name.c_str(), windows.windows.size());
          const auto params = turnip::train(windows, tc, cfg.train, nullptr, nullptr, log_epoch);
          io::PipelineConfig fold_cfg = cfg;
          fold_cfg.turnip = tc;
          for (const auto* v : videos) {
            if (std::find(fold.test.begin(), fold.test.end(), v->entry.video_id) != fold.test.end()) {
              run(*v, &params, fold_cfg);
            }
          }
        }
      } else {
        io::PipelineConfig c = cfg;
        if (ck) c.turnip = ck->config;
        for (const auto* v : videos) run(*v, ck ? &ck->params : nullptr, c);
      }
      const EvalReport report = make_report(std::move(records));
      if (ev_out.empty()) {
        std::cout << report.to_text();
      } else {
        guard.add(ev_out);
        io::write_text(ev_out, report.to_text());
        std::cout << report.summary() << "\n";
      }
      if (!ev_ba.empty()) {
        guard.add(ev_ba);
        io::write_text(ev_ba, bland_altman(report.pairs()).table());
      }
    } else if (*prv) {
      std::string out;
      for (const auto& path : prv_waves) {
        const PrvMetrics pm = prv_metrics(io::read_waveform(path));
        out += json{{"file", path},
                    {"rmssd_ms", pm.rmssd_ms},
                    {"hf_power_ms2", pm.hf_power_ms2},
                    {"n_beats", pm.peak_indices.size()}}
                   .dump() +
               "\n";
      }
      if (prv_out.empty()) {
        std::cout << out;
      } else {
        guard.add(prv_out);
        io::write_text(prv_out, out);
      }
    }
    guard.commit();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: IoFailure: " << e.what() << "\n";
    return 3;
  }
}
