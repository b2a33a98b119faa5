#include "ippg/turnip/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <json.hpp>

#include "ippg/error.hpp"

namespace ippg::turnip {

using nlohmann::json;

namespace {

json config_json(const TurnipConfig& c) {
  return json{{"input_channels", c.input_channels},
              {"stage_channels", c.stage_channels},
              {"downsample_factors", c.downsample_factors},
              {"kernel_size", c.kernel_size},
              {"gru_hidden", c.gru_hidden},
              {"use_gru", c.use_gru},
              {"window_length", c.window_length},
              {"seed", c.seed}};
}

TurnipConfig config_from(const json& j) {
  TurnipConfig c;
  c.input_channels = j.value("input_channels", c.input_channels);
  c.stage_channels = j.value("stage_channels", c.stage_channels);
  c.downsample_factors = j.value("downsample_factors", c.downsample_factors);
  c.kernel_size = j.value("kernel_size", c.kernel_size);
  c.gru_hidden = j.value("gru_hidden", c.gru_hidden);
  c.use_gru = j.value("use_gru", c.use_gru);
  c.window_length = j.value("window_length", c.window_length);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
  }
  return v;
}

std::uint64_t to_le64(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return (std::uint64_t{to_le(static_cast<std::uint32_t>(v))} << 32) |
           to_le(static_cast<std::uint32_t>(v >> 32));
  }
  return v;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptCheckpoint, what);
}

}  // namespace

std::string config_to_json(const TurnipConfig& config) { return config_json(config).dump(); }

TurnipConfig config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

void save_checkpoint(const TurnipParams& params, const TurnipConfig& config,
                     const std::filesystem::path& path) {
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : params.tensors()) {
    const auto count = static_cast<std::uint64_t>(t.value.size());
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", count}});
    offset += count;
  }
  const json manifest{{"format_version", kCheckpointVersion},
                      {"config", config_json(config)},
                      {"tensors", tensors},
                      {"elements", offset}};
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint32_t version = to_le(kCheckpointVersion);
  const std::uint64_t size = to_le64(text.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&size), sizeof size);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : params.tensors()) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(t.value.data()[i]));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const TurnipConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t header = sizeof kCheckpointMagic + 4 + 8;
  if (bytes.size() < header) corrupt("file shorter than the header");
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) corrupt("bad magic");
  std::uint32_t version = 0;
  std::uint64_t size = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&size, bytes.data() + 12, 8);
  version = to_le(version);
  size = to_le64(size);
  if (version != kCheckpointVersion) corrupt("unsupported format version " + std::to_string(version));
  if (size > bytes.size() - header) corrupt("manifest overruns the file");

  json manifest;
  TurnipConfig config;
  try {
    manifest = json::parse(bytes.substr(header, size));
    config = config_from(manifest.at("config"));
  } catch (const json::exception& e) {
    corrupt(std::string("malformed manifest: ") + e.what());
  } catch (const Error& e) {
    corrupt(std::string("invalid stored config: ") + e.what());
  }

  const auto layout = parameter_layout(config);
  if (expected) {
    const auto want = parameter_layout(*expected);
    bool same = want.size() == layout.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      same = want[i].name == layout[i].name && want[i].shape == layout[i].shape;
    }
    if (!same) corrupt("stored parameter shapes are incompatible with the requested config");
  }

  const char* blob = bytes.data() + header + size;
  const std::uint64_t blob_elems = (bytes.size() - header - size) / 4;
  const std::uint64_t expected_elems = std::accumulate(
      layout.begin(), layout.end(), std::uint64_t{0}, [](std::uint64_t acc, const TensorSpec& t) {
        return acc + static_cast<std::uint64_t>(t.rows) * static_cast<std::uint64_t>(t.cols);
      });
  if (bytes.size() - header - size != 4 * expected_elems) {
    corrupt("blob holds " + std::to_string(bytes.size() - header - size) + " bytes, expected " +
            std::to_string(4 * expected_elems));
  }
  Checkpoint ck{{}, config};
  try {
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != layout.size()) corrupt("tensor count does not match the stored config");
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto& t = tensors[i];
      const auto& spec = layout[i];
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<std::vector<int>>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      const auto count = t.at("count").get<std::uint64_t>();
      if (name != spec.name || shape != spec.shape) corrupt("unexpected tensor " + name);
      const auto want = static_cast<std::uint64_t>(spec.rows) * static_cast<std::uint64_t>(spec.cols);
      if (count != want) corrupt("element count mismatch for " + name);
      if (offset > blob_elems || count > blob_elems - offset) corrupt("blob truncated at " + name);
      Mat<float> m(spec.rows, spec.cols);
      for (std::uint64_t k = 0; k < count; ++k) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, blob + 4 * (offset + k), 4);
        m.data()[k] = std::bit_cast<float>(to_le(bits));
      }
      ck.params.add(name, shape, std::move(m));
    }
  } catch (const json::exception& e) {
    corrupt(std::string("malformed tensor entry: ") + e.what());
  }
  if (!ck.params.all_finite()) corrupt("non-finite parameter values");
  return ck;
}

}  // namespace ippg::turnip
