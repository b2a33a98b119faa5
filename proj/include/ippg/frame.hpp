#pragma once

#include <cstddef>
#include <vector>

namespace ippg {

/// H x W x C frame, row-major with interleaved channels.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Frame() = default;
  Frame(int w, int h, int c) : width(w), height(h), channels(c), data(std::size_t(w) * h * c, 0.f) {}

  float& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
  float at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * channels + c]; }
};

/// Random-access source of decoded frames.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t frame_count() const = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual int channels() const = 0;
  virtual double fps() const = 0;
  virtual Frame frame(std::size_t index) const = 0;
};

/// Frames held in memory.
class MemoryFrameSource final : public FrameSource {
 public:
  MemoryFrameSource(std::vector<Frame> frames, double fps) : frames_(std::move(frames)), fps_(fps) {}

  std::size_t frame_count() const override { return frames_.size(); }
  int width() const override { return frames_.empty() ? 0 : frames_.front().width; }
  int height() const override { return frames_.empty() ? 0 : frames_.front().height; }
  int channels() const override { return frames_.empty() ? 0 : frames_.front().channels; }
  double fps() const override { return fps_; }
  Frame frame(std::size_t index) const override { return frames_.at(index); }

 private:
  std::vector<Frame> frames_;
  double fps_;
};

}  // namespace ippg
