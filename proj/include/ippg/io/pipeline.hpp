#pragma once

#include <string>
#include <vector>

#include "ippg/baselines.hpp"
#include "ippg/evaluation.hpp"
#include "ippg/frame.hpp"
#include "ippg/io/manifest.hpp"
#include "ippg/regions.hpp"
#include "ippg/turnip/params.hpp"

namespace ippg::io {

struct ExtractReport {
  std::size_t augmentation_warnings = 0;
  std::size_t extraction_warnings = 0;
};

/// Landmarks (optionally smoothed) -> augmented landmarks -> region series.
RegionSeries extract_video(const FrameSource& frames, std::vector<LandmarkFrame> landmarks,
                           const ChannelMode& mode, int smooth_window, double sentinel,
                           ExtractReport* report = nullptr);

/// Preprocessed series with ground truth conditioned onto its time base;
/// both are cropped to their common length.
struct PreparedClip {
  RegionSeries series;
  PulseWaveform gt;
};

PreparedClip prepare_clip(const RegionSeries& raw, const PulseWaveform& gt, const PipelineConfig& cfg);

/// Overlapping training windows of cfg.window_s at cfg.stride_s.
WindowSet training_windows(const PreparedClip& clip, const PipelineConfig& cfg);

/// Concatenation of several clips' training windows.
WindowSet merge_windows(std::vector<WindowSet> sets);

/// Network outputs for consecutive non-overlapping windows starting at frame 0.
std::vector<PulseWaveform> infer_windows(const RegionSeries& prepared, const turnip::TurnipParams& params,
                                         const turnip::TurnipConfig& config);

struct WindowHr {
  std::size_t index = 0;
  double gt_bpm = 0.0;
  double pred_bpm = 0.0;
};

/// Heart rate per evaluation window, each built from `group` consecutive
/// network windows (standardized and joined) against the ground truth over
/// the same span.
std::vector<WindowHr> score_windows(const std::vector<PulseWaveform>& outputs, const PulseWaveform& gt,
                                    std::size_t group);

/// Baseline heart rate per evaluation window of `window_frames` frames.
std::vector<WindowHr> score_baseline(const RegionSeries& rgb, const PulseWaveform& gt, BaselineMethod method,
                                     const PipelineConfig& cfg, std::size_t window_frames);

enum class Method { Turnip, Chrom, Pos };

/// Series for one manifest video in the requested channel mode: the stored
/// series when it matches, otherwise extracted from frames and landmarks.
RegionSeries load_video_series(const DatasetManifest& manifest, const ManifestVideo& video,
                               const ChannelMode& mode, const PipelineConfig& cfg);

PulseWaveform load_video_gt(const DatasetManifest& manifest, const ManifestVideo& video);

/// Training windows of the listed videos.
WindowSet manifest_windows(const DatasetManifest& manifest, const std::vector<std::string>& video_ids,
                           const PipelineConfig& cfg);

/// Records for one video. `group` is 1 for single windows, 3 for 30 s estimates
/// from 10 s windows. `params` is required for Method::Turnip.
std::vector<EvalRecord> evaluate_video(const DatasetManifest& manifest, const ManifestVideo& video, Method method,
                                       const PipelineConfig& cfg, const turnip::TurnipParams* params,
                                       std::size_t group);

}  // namespace ippg::io
