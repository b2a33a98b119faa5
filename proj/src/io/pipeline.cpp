#include "ippg/io/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "ippg/error.hpp"
#include "ippg/estimation.hpp"
#include "ippg/io/formats.hpp"
#include "ippg/io/frames.hpp"
#include "ippg/turnip/network.hpp"

namespace ippg::io {

RegionSeries extract_video(const FrameSource& frames, std::vector<LandmarkFrame> landmarks,
                           const ChannelMode& mode, int smooth_window, double sentinel,
                           ExtractReport* report) {
  if (smooth_window > 1) landmarks = smooth_landmarks(landmarks, std::size_t(smooth_window));
  std::vector<AugmentationWarning> aug_warnings;
  std::vector<AugmentedLandmarks> augmented;
  augmented.reserve(landmarks.size());
  for (const auto& f : landmarks) augmented.push_back(augment_landmarks(f, &aug_warnings));
  ExtractionResult res = extract_region_series(frames, augmented, build_region_map(), mode, sentinel);
  if (report) {
    report->augmentation_warnings = aug_warnings.size();
    report->extraction_warnings = res.warnings.size();
  }
  return std::move(res.series);
}

PreparedClip prepare_clip(const RegionSeries& raw, const PulseWaveform& gt, const PipelineConfig& cfg) {
  PreparedClip clip;
  clip.gt = preprocess_ground_truth(gt, raw.fs, cfg.preprocess.band);
  const std::size_t n = std::min(raw.frames, clip.gt.samples.size());
  clip.series = preprocess_series(n == raw.frames ? raw : slice_series(raw, 0, n), cfg.preprocess);
  clip.gt.samples.resize(n);
  return clip;
}

WindowSet training_windows(const PreparedClip& clip, const PipelineConfig& cfg) {
  const std::size_t len = cfg.window_frames(clip.series.fs);
  const auto stride = std::max<std::size_t>(1, std::size_t(std::llround(cfg.stride_s * clip.series.fs)));
  return make_windows(clip.series, clip.gt, len, stride);
}

WindowSet merge_windows(std::vector<WindowSet> sets) {
  if (sets.empty()) throw Error(ErrorCode::EmptyInput, "no window sets to merge");
  WindowSet out{{}, sets.front().length, sets.front().stride, sets.front().fs};
  for (auto& s : sets) {
    if (s.length != out.length || s.fs != out.fs) {
      throw Error(ErrorCode::MismatchedRates, "window sets differ in length or rate");
    }
    for (auto& w : s.windows) out.windows.push_back(std::move(w));
  }
  return out;
}

std::vector<PulseWaveform> infer_windows(const RegionSeries& prepared, const turnip::TurnipParams& params,
                                         const turnip::TurnipConfig& config) {
  const auto len = std::size_t(config.window_length);
  std::vector<PulseWaveform> out;
  for (std::size_t start = 0; start + len <= prepared.frames; start += len) {
    const auto x = turnip::to_network_input<float>(slice_series(prepared, start, len));
    const auto y = turnip::forward<float>(x, params, config);
    out.push_back({std::vector<double>(y.data(), y.data() + y.size()), prepared.fs});
  }
  return out;
}

std::vector<WindowHr> score_windows(const std::vector<PulseWaveform>& outputs, const PulseWaveform& gt,
                                    std::size_t group) {
  if (group == 0) throw Error(ErrorCode::Usage, "window group must be positive");
  std::vector<WindowHr> out;
  std::size_t offset = 0;
  for (std::size_t k = 0; (k + 1) * group <= outputs.size(); ++k) {
    const std::span<const PulseWaveform> parts(outputs.data() + k * group, group);
    std::size_t len = 0;
    for (const auto& p : parts) len += p.samples.size();
    if (offset + len > gt.samples.size()) break;
    const PulseWaveform truth{{gt.samples.begin() + std::ptrdiff_t(offset),
                               gt.samples.begin() + std::ptrdiff_t(offset + len)},
                              gt.fs};
    out.push_back({k, estimate_hr(truth).bpm, estimate_hr(concat_windows(parts)).bpm});
    offset += len;
  }
  return out;
}

std::vector<WindowHr> score_baseline(const RegionSeries& rgb, const PulseWaveform& gt, BaselineMethod method,
                                     const PipelineConfig& cfg, std::size_t window_frames) {
  BandpassSpec spec = cfg.preprocess.band;
  spec.fs = rgb.fs;
  const IirFilter filt = design_bandpass(spec);
  const PulseWaveform truth = preprocess_ground_truth(gt, rgb.fs, cfg.preprocess.band);
  std::vector<WindowHr> out;
  for (std::size_t k = 0; (k + 1) * window_frames <= std::min(rgb.frames, truth.samples.size()); ++k) {
    const std::size_t start = k * window_frames;
    const PulseWaveform seg{{truth.samples.begin() + std::ptrdiff_t(start),
                             truth.samples.begin() + std::ptrdiff_t(start + window_frames)},
                            rgb.fs};
    const RegionSeries slice = slice_series(rgb, start, window_frames);
    out.push_back({k, estimate_hr(seg).bpm, baseline_hr(slice, method, &filt).bpm});
  }
  return out;
}

RegionSeries load_video_series(const DatasetManifest& manifest, const ManifestVideo& video,
                               const ChannelMode& mode, const PipelineConfig& cfg) {
  if (!video.series.empty()) {
    RegionSeries s = read_region_series(manifest.resolve(video.series));
    if (s.channels == mode.output_channels()) return s;
  }
  const FileFrameSource frames(manifest.resolve(video.frames));
  mode.validate(frames.channels());
  return extract_video(frames, read_landmarks(manifest.resolve(video.landmarks)), mode, cfg.smooth_landmarks,
                       cfg.sentinel);
}

PulseWaveform load_video_gt(const DatasetManifest& manifest, const ManifestVideo& video) {
  PulseWaveform gt = read_waveform(manifest.resolve(video.gt));
  if (video.gt_fs > 0.0 && std::abs(gt.fs - video.gt_fs) > 1e-9 * video.gt_fs) {
    throw Error(ErrorCode::MismatchedRates, "video " + video.entry.video_id +
                                                ": ground-truth file rate disagrees with the manifest");
  }
  return gt;
}

WindowSet manifest_windows(const DatasetManifest& manifest, const std::vector<std::string>& video_ids,
                           const PipelineConfig& cfg) {
  const ChannelMode mode = ChannelMode::parse(cfg.channel_mode);
  std::vector<WindowSet> sets;
  for (const auto& v : manifest.videos) {
    if (std::find(video_ids.begin(), video_ids.end(), v.entry.video_id) == video_ids.end()) continue;
    const PreparedClip clip = prepare_clip(load_video_series(manifest, v, mode, cfg), load_video_gt(manifest, v), cfg);
    sets.push_back(training_windows(clip, cfg));
  }
  return merge_windows(std::move(sets));
}

std::vector<EvalRecord> evaluate_video(const DatasetManifest& manifest, const ManifestVideo& video, Method method,
                                       const PipelineConfig& cfg, const turnip::TurnipParams* params,
                                       std::size_t group) {
  const PulseWaveform gt = load_video_gt(manifest, video);
  std::vector<WindowHr> scores;
  if (method == Method::Turnip) {
    if (!params) throw Error(ErrorCode::Usage, "evaluating the network requires parameters");
    const RegionSeries raw = load_video_series(manifest, video, ChannelMode::parse(cfg.channel_mode), cfg);
    turnip::TurnipConfig tc = cfg.turnip;
    tc.window_length = int(cfg.window_frames(raw.fs));
    const PreparedClip clip = prepare_clip(raw, gt, cfg);
    scores = score_windows(infer_windows(clip.series, *params, tc), clip.gt, group);
  } else {
    const RegionSeries rgb = load_video_series(manifest, video, ChannelMode::parse("rgb"), cfg);
    const auto method_id = method == Method::Chrom ? BaselineMethod::Chrom : BaselineMethod::Pos;
    scores = score_baseline(rgb, gt, method_id, cfg, cfg.window_frames(rgb.fs) * group);
  }
  std::vector<EvalRecord> records;
  for (const auto& s : scores) {
    records.push_back({video.entry.video_id + ":" + std::to_string(s.index), video.entry.subject_id, s.gt_bpm,
                       s.pred_bpm});
  }
  return records;
}

}  // namespace ippg::io
