#include "ippg/io/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <random>

#include "ippg/error.hpp"
#include "ippg/io/formats.hpp"
#include "ippg/io/frames.hpp"
#include "ippg/turnip/checkpoint.hpp"

namespace ippg::io {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

const char* step_name(PreprocessStep s) {
  switch (s) {
    case PreprocessStep::AcDc: return "acdc";
    case PreprocessStep::Bandpass: return "bandpass";
    case PreprocessStep::Range: return "range";
  }
  return "";
}

PreprocessStep parse_step(const std::string& s) {
  if (s == "acdc") return PreprocessStep::AcDc;
  if (s == "bandpass") return PreprocessStep::Bandpass;
  if (s == "range") return PreprocessStep::Range;
  bad_config("unknown preprocessing step '" + s + "'");
}

json synth_json(const SynthConfig& c) {
  json track = json::array(), occ = json::array();
  for (const auto& k : c.hr_track) track.push_back({{"t_s", k.t_s}, {"bpm", k.bpm}});
  for (const auto& o : c.occlusions) {
    occ.push_back({{"first_frame", o.first_frame}, {"last_frame", o.last_frame}, {"landmarks", o.landmarks}});
  }
  return {{"duration_s", c.duration_s}, {"fps", c.fps},         {"gt_fs", c.gt_fs},
          {"hr_track", track},          {"pulse_amplitude", c.pulse_amplitude},
          {"motion_px", c.motion_px},   {"noise_std", c.noise_std}, {"occlusions", occ},
          {"width", c.width},           {"height", c.height},   {"seed", c.seed}};
}

SynthConfig synth_from(const json& j) {
  SynthConfig c;
  c.duration_s = j.value("duration_s", c.duration_s);
  c.fps = j.value("fps", c.fps);
  c.gt_fs = j.value("gt_fs", c.gt_fs);
  if (j.contains("hr_bpm")) c.hr_track = {{0.0, j.at("hr_bpm").get<double>()}};
  if (j.contains("hr_track")) {
    c.hr_track.clear();
    for (const auto& k : j.at("hr_track")) c.hr_track.push_back({k.at("t_s").get<double>(), k.at("bpm").get<double>()});
  }
  c.pulse_amplitude = j.value("pulse_amplitude", c.pulse_amplitude);
  c.motion_px = j.value("motion_px", c.motion_px);
  c.noise_std = j.value("noise_std", c.noise_std);
  if (j.contains("occlusions")) {
    for (const auto& o : j.at("occlusions")) {
      c.occlusions.push_back({o.at("first_frame").get<std::size_t>(), o.at("last_frame").get<std::size_t>(),
                              o.at("landmarks").get<std::vector<std::size_t>>()});
    }
  }
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

template <class F>
auto parse_or_invalid(const std::string& text, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
}

}  // namespace

std::vector<VideoEntry> DatasetManifest::entries() const {
  std::vector<VideoEntry> out;
  for (const auto& v : videos) out.push_back(v.entry);
  return out;
}

void DatasetManifest::check_files() const {
  for (const auto& v : videos) {
    for (const auto& p : {v.frames, v.landmarks, v.gt}) {
      if (!fs::exists(resolve(p))) {
        throw Error(ErrorCode::BadFormat, "video " + v.entry.video_id + ": missing " + resolve(p).string());
      }
    }
    if (!(v.gt_fs > 0.0)) throw Error(ErrorCode::BadFormat, "video " + v.entry.video_id + ": gt_fs must be positive");
  }
}

DatasetManifest read_manifest(const fs::path& path) {
  DatasetManifest m;
  m.base = path.parent_path();
  try {
    const json j = json::parse(read_text(path));
    m.name = j.value("name", std::string{});
    for (const auto& v : j.at("videos")) {
      ManifestVideo mv;
      mv.entry.video_id = v.at("video_id").get<std::string>();
      mv.entry.subject_id = v.at("subject_id").get<std::string>();
      mv.entry.dataset = v.value("dataset", m.name);
      if (v.contains("motion_score")) mv.entry.motion_score = v.at("motion_score").get<double>();
      mv.entry.label = v.value("label", std::string{});
      mv.frames = v.value("frames", std::string{});
      mv.landmarks = v.value("landmarks", std::string{});
      mv.gt = v.at("gt").get<std::string>();
      mv.gt_fs = v.at("gt_fs").get<double>();
      mv.series = v.value("series", std::string{});
      m.videos.push_back(std::move(mv));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  json videos = json::array();
  for (const auto& v : m.videos) {
    json j{{"video_id", v.entry.video_id}, {"subject_id", v.entry.subject_id},
           {"dataset", v.entry.dataset},   {"frames", v.frames.generic_string()},
           {"landmarks", v.landmarks.generic_string()}, {"gt", v.gt.generic_string()},
           {"gt_fs", v.gt_fs}};
    if (v.entry.motion_score) j["motion_score"] = *v.entry.motion_score;
    if (!v.entry.label.empty()) j["label"] = v.entry.label;
    if (!v.series.empty()) j["series"] = v.series.generic_string();
    videos.push_back(std::move(j));
  }
  write_text(path, json{{"name", m.name}, {"videos", videos}}.dump(2) + "\n");
}

std::size_t PipelineConfig::window_frames(double fps) const {
  const double n = window_s * fps;
  if (!(n >= 2.0) || std::abs(n - std::round(n)) > 1e-9) {
    bad_config("window of " + std::to_string(window_s) + " s is not a whole number of frames");
  }
  return static_cast<std::size_t>(std::llround(n));
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
  json steps = json::array();
  for (auto s : c.preprocess.steps) steps.push_back(step_name(s));
  const auto& t = c.train;
  const json j{{"channel_mode", c.channel_mode},
               {"smooth_landmarks", c.smooth_landmarks},
               {"sentinel", c.sentinel},
               {"preprocess",
                {{"order", c.preprocess.band.order},
                 {"low_hz", c.preprocess.band.low_hz},
                 {"high_hz", c.preprocess.band.high_hz},
                 {"steps", steps}}},
               {"window_s", c.window_s},
               {"stride_s", c.stride_s},
               {"turnip", json::parse(turnip::config_to_json(c.turnip))},
               {"train",
                {{"lr", t.lr}, {"weight_decay", t.weight_decay}, {"lr_decay", t.lr_decay},
                 {"epochs", t.epochs}, {"aug_prob", t.aug_prob}, {"aug_min", t.aug_min},
                 {"aug_max", t.aug_max}, {"batch_size", t.batch_size}, {"seed", t.seed}}}};
  return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  return parse_or_invalid(text, [](const json& j) {
    PipelineConfig c;
    c.channel_mode = j.value("channel_mode", c.channel_mode);
    c.smooth_landmarks = j.value("smooth_landmarks", c.smooth_landmarks);
    c.sentinel = j.value("sentinel", c.sentinel);
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      c.preprocess.band.order = p.value("order", c.preprocess.band.order);
      c.preprocess.band.low_hz = p.value("low_hz", c.preprocess.band.low_hz);
      c.preprocess.band.high_hz = p.value("high_hz", c.preprocess.band.high_hz);
      if (p.contains("steps")) {
        c.preprocess.steps.clear();
        for (const auto& s : p.at("steps")) c.preprocess.steps.push_back(parse_step(s.get<std::string>()));
      }
    }
    c.window_s = j.value("window_s", c.window_s);
    c.stride_s = j.value("stride_s", c.stride_s);
    if (j.contains("turnip")) c.turnip = turnip::config_from_json(j.at("turnip").dump());
    if (j.contains("train")) {
      const auto& t = j.at("train");
      auto& h = c.train;
      h.lr = t.value("lr", h.lr);
      h.weight_decay = t.value("weight_decay", h.weight_decay);
      h.lr_decay = t.value("lr_decay", h.lr_decay);
      h.epochs = t.value("epochs", h.epochs);
      h.aug_prob = t.value("aug_prob", h.aug_prob);
      h.aug_min = t.value("aug_min", h.aug_min);
      h.aug_max = t.value("aug_max", h.aug_max);
      h.batch_size = t.value("batch_size", h.batch_size);
      h.seed = t.value("seed", h.seed);
    }
    if (!(c.window_s > 0.0) || !(c.stride_s > 0.0)) bad_config("window and stride must be positive");
    if (c.smooth_landmarks < 0) bad_config("smooth_landmarks must be >= 0");
    if (c.train.aug_prob < 0.0 || c.train.aug_prob > 1.0) bad_config("aug_prob must lie in [0, 1]");
    if (c.train.aug_min < 0.0 || c.train.aug_min > c.train.aug_max || c.train.aug_max >= 1.0) {
      bad_config("augmentation range must satisfy 0 <= min <= max < 1");
    }
    return c;
  });
}

PipelineConfig read_pipeline_config(const fs::path& path) { return pipeline_config_from_json(read_text(path)); }

std::string synth_config_to_json(const SynthConfig& cfg) { return synth_json(cfg).dump(2) + "\n"; }

SynthConfig synth_config_from_json(const std::string& text) {
  return parse_or_invalid(text, [](const json& j) { return synth_from(j); });
}

std::string synth_corpus_config_to_json(const SynthCorpusConfig& c) {
  return json{{"base", synth_json(c.base)}, {"videos", c.videos}, {"subjects", c.subjects},
              {"hr_min", c.hr_min},         {"hr_max", c.hr_max}, {"seed", c.seed}}
             .dump(2) +
         "\n";
}

SynthCorpusConfig synth_corpus_config_from_json(const std::string& text) {
  return parse_or_invalid(text, [](const json& j) {
    SynthCorpusConfig c;
    if (j.contains("base")) c.base = synth_from(j.at("base"));
    c.videos = j.value("videos", c.videos);
    c.subjects = j.value("subjects", c.subjects);
    c.hr_min = j.value("hr_min", c.hr_min);
    c.hr_max = j.value("hr_max", c.hr_max);
    c.seed = j.value("seed", c.seed);
    if (c.videos == 0 || c.subjects == 0 || c.subjects > c.videos) bad_config("need 1 <= subjects <= videos");
    if (c.hr_min < 42.0 || c.hr_max > 240.0 || c.hr_min > c.hr_max) bad_config("heart-rate range must lie in [42, 240]");
    return c;
  });
}

DatasetManifest write_synth_corpus(const SynthCorpusConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> hr(cfg.hr_min, cfg.hr_max);
  DatasetManifest m;
  m.name = "synthetic";
  m.base = dir;
  for (std::size_t i = 0; i < cfg.videos; ++i) {
    SynthConfig sc = cfg.base;
    sc.hr_track = {{0.0, hr(rng)}};
    sc.seed = rng();
    const SynthVideo video = synth_generate(sc);

    char id[32], subject[32];
    std::snprintf(id, sizeof id, "v%02zu", i);
    std::snprintf(subject, sizeof subject, "s%02zu", i % cfg.subjects);
    ManifestVideo mv;
    mv.entry = {id, subject, m.name, motion_score(video.landmarks), {}};
    mv.frames = std::string(id) + ".ipg";
    mv.landmarks = std::string(id) + ".landmarks.jsonl";
    mv.gt = std::string(id) + ".gt.json";
    mv.gt_fs = video.gt.fs;
    write_frames(dir / mv.frames, MemoryFrameSource(video.frames, sc.fps), PixelType::U8);
    write_landmarks(dir / mv.landmarks, video.landmarks);
    write_waveform(dir / mv.gt, video.gt);
    m.videos.push_back(std::move(mv));
  }
  write_manifest(dir / "manifest.json", m);
  return m;
}

}  // namespace ippg::io
