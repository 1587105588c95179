#include "caries/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "caries/error.hpp"
#include "json.hpp"

namespace caries {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'C', 'N', 'N', 'C', 'K', 'P', '1'};
constexpr std::size_t kPrefix = 16;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[pos + i])} << (8 * i);
  return v;
}

void put_floats(std::string& out, std::span<const float> values) {
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

void get_floats(const std::string& in, std::size_t pos, std::span<float> values) {
  for (auto& f : values) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t{static_cast<unsigned char>(in[pos + i])} << (8 * i);
    f = std::bit_cast<float>(bits);
    pos += 4;
  }
}

json param_entry(const std::string& name, std::vector<int> shape, std::uint64_t offset, std::uint64_t count) {
  return json{{"name", name}, {"shape", std::move(shape)}, {"offset", offset}, {"length", count * 4}};
}

}  // namespace

std::string checkpoint_to_bytes(const Checkpoint& ckpt) {
  const NetworkConfig& cfg = ckpt.network.config();
  json header;
  header["format"] = "FCNNCKP1";
  header["config"] = {{"depth", cfg.depth}, {"base_channels", cfg.base_channels}, {"kernel_size", cfg.kernel_size}};
  const double best = ckpt.metadata.best_val_loss;
  header["metadata"] = {{"epoch", ckpt.metadata.epoch},
                        {"best_val_loss", std::isfinite(best) ? json(best) : json(nullptr)},
                        {"seed", ckpt.metadata.seed}};
  json params = json::array();
  std::uint64_t offset = 0;
  for (const auto& layer : ckpt.network.layers()) {
    const Shape s = layer.weight.shape();
    params.push_back(param_entry(layer.name + ".weight", {s.n, s.c, s.h, s.w}, offset, layer.weight.size()));
    offset += layer.weight.size() * 4;
    params.push_back(param_entry(layer.name + ".bias", {static_cast<int>(layer.bias.size())}, offset,
                                 layer.bias.size()));
    offset += layer.bias.size() * 4;
  }
  header["parameters"] = std::move(params);
  header["payload_bytes"] = offset;

  const std::string text = header.dump();
  std::string out(kMagic, kMagic + 8);
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& layer : ckpt.network.layers()) {
    put_floats(out, layer.weight.data());
    put_floats(out, layer.bias);
  }
  return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  if (bytes.size() < 8) throw FormatError("checkpoint shorter than its magic", bytes.size());
  if (!std::equal(kMagic, kMagic + 8, bytes.begin())) throw FormatError("bad checkpoint magic", 0);
  if (bytes.size() < kPrefix) throw FormatError("truncated checkpoint header length", bytes.size());
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (header_len > bytes.size() - kPrefix) throw FormatError("truncated checkpoint header", bytes.size());

  json header;
  try {
    header = json::parse(bytes.begin() + kPrefix, bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix + header_len));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what(), kPrefix + e.byte);
  }

  const std::size_t payload = kPrefix + header_len;
  try {
    NetworkConfig cfg;
    cfg.depth = header.at("config").at("depth").get<int>();
    cfg.base_channels = header.at("config").at("base_channels").get<int>();
    cfg.kernel_size = header.at("config").at("kernel_size").get<int>();
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint config invalid: ") + e.what(), kPrefix);
    }

    Checkpoint ckpt{Network::zeros(cfg), {}};
    const auto& meta = header.at("metadata");
    ckpt.metadata.epoch = meta.at("epoch").get<int>();
    ckpt.metadata.best_val_loss = meta.at("best_val_loss").is_null()
                                      ? std::numeric_limits<double>::infinity()
                                      : meta.at("best_val_loss").get<double>();
    ckpt.metadata.seed = meta.at("seed").get<std::uint64_t>();

    const auto& params = header.at("parameters");
    auto& layers = ckpt.network.layers();
    if (params.size() != 2 * layers.size()) {
      throw FormatError("checkpoint lists " + std::to_string(params.size()) + " parameters, config implies " +
                            std::to_string(2 * layers.size()),
                        kPrefix);
    }
    std::uint64_t expected_offset = 0;
    auto read_param = [&](const json& entry, const std::string& name, const std::vector<int>& shape,
                          std::span<float> dst) {
      if (entry.at("name").get<std::string>() != name) {
        throw FormatError("expected parameter '" + name + "'", kPrefix);
      }
      if (entry.at("shape").get<std::vector<int>>() != shape) {
        throw FormatError("parameter '" + name + "' has a shape inconsistent with the config", kPrefix);
      }
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto length = entry.at("length").get<std::uint64_t>();
      if (offset != expected_offset || length != dst.size() * 4) {
        throw FormatError("parameter '" + name + "' offset/length inconsistent with its shape", kPrefix);
      }
      if (payload + offset + length > bytes.size()) {
        throw FormatError("payload truncated inside parameter '" + name + "'", bytes.size());
      }
      get_floats(bytes, payload + offset, dst);
      expected_offset += length;
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& layer = layers[i];
      const Shape s = layer.weight.shape();
      read_param(params[2 * i], layer.name + ".weight", {s.n, s.c, s.h, s.w}, layer.weight.data());
      read_param(params[2 * i + 1], layer.name + ".bias", {static_cast<int>(layer.bias.size())}, layer.bias);
    }
    if (header.contains("payload_bytes") && header["payload_bytes"].get<std::uint64_t>() != expected_offset) {
      throw FormatError("payload_bytes disagrees with parameter table", kPrefix);
    }
    if (payload + expected_offset != bytes.size()) {
      throw FormatError("trailing bytes after checkpoint payload", payload + expected_offset);
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what(), kPrefix);
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = checkpoint_to_bytes(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

ProbabilityMap predict_probabilities(const Checkpoint& checkpoint, const GrayImage& image) {
  checkpoint.network.config().check_input(image.height(), image.width());
  const Tensor logits = checkpoint.network.forward(image_to_tensor(image));
  ProbabilityMap map{image.width(), image.height(), std::vector<float>(logits.size())};
  for (std::size_t i = 0; i < logits.size(); ++i) map.values[i] = stable_sigmoid(logits[i]);
  return map;
}

}  // namespace caries
