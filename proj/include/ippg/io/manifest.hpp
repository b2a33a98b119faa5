#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ippg/io/synth.hpp"
#include "ippg/preprocess.hpp"
#include "ippg/splits.hpp"
#include "ippg/turnip/params.hpp"
#include "ippg/turnip/train.hpp"

namespace ippg::io {

namespace fs = std::filesystem;

struct ManifestVideo {
  VideoEntry entry;
  fs::path frames;     // raw frame container
  fs::path landmarks;  // landmark JSON lines
  fs::path gt;         // waveform JSON
  double gt_fs = 0.0;
  fs::path series;     // optional extracted region series
};

/// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  std::string name;
  std::vector<ManifestVideo> videos;
  fs::path base;

  fs::path resolve(const fs::path& p) const { return p.empty() || p.is_absolute() ? p : base / p; }
  std::vector<VideoEntry> entries() const;
  /// Throws BadFormat when a referenced file is missing or a rate is not positive.
  void check_files() const;
};

/// Throws BadFormat, IoFailure.
DatasetManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const DatasetManifest& manifest);

/// Every tunable of the extraction, preprocessing, windowing and training chain.
struct PipelineConfig {
  std::string channel_mode = "rog";
  int smooth_landmarks = 0;  // moving-average frames, 0 disables
  double sentinel = kDefaultSentinel;
  PreprocessConfig preprocess;
  double window_s = 10.0;
  double stride_s = 2.0;  // training window stride
  turnip::TurnipConfig turnip;
  turnip::TrainHyper train;

  /// Window length in frames at `fps`; throws ConfigInvalid when not an integer >= 2.
  std::size_t window_frames(double fps) const;
};

std::string pipeline_config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults. Throws ConfigInvalid.
PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig read_pipeline_config(const fs::path& path);

std::string synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const std::string& text);

/// A synthetic corpus: `videos` clips spread over `subjects` subjects, each
/// with a constant heart rate drawn from [hr_min, hr_max] and its own seed.
struct SynthCorpusConfig {
  SynthConfig base;
  std::size_t videos = 4;
  std::size_t subjects = 2;
  double hr_min = 55.0;
  double hr_max = 110.0;
  std::uint64_t seed = 0;
};

std::string synth_corpus_config_to_json(const SynthCorpusConfig& cfg);
SynthCorpusConfig synth_corpus_config_from_json(const std::string& text);

/// Renders the corpus into `dir` (frames, landmarks, ground truth and
/// manifest.json) and returns the manifest.
DatasetManifest write_synth_corpus(const SynthCorpusConfig& cfg, const fs::path& dir);

}  // namespace ippg::io
