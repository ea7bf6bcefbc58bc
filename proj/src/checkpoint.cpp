#include "valvenet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace valvenet {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

ModelSpec read_header(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("not a checkpoint: bad magic");
  }
  if (bytes.size() < 12) throw FormatError("corrupt block 'header': file too short");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t len = get_u32(bytes.data() + 8);
  if (bytes.size() - 12 < len) {
    throw FormatError("corrupt block 'header': declared " + std::to_string(len) +
                      " bytes, file has " + std::to_string(bytes.size() - 12));
  }
  const std::string text(bytes.begin() + 12, bytes.begin() + 12 + len);
  pos = 12 + len;
  try {
    return ModelSpec::from_text(text);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("corrupt block 'header': ") + e.what());
  }
}

Model<float> read_params(const std::vector<std::uint8_t>& bytes, std::size_t pos,
                         const ModelSpec& spec) {
  Model<float> model(spec, 0);
  for (auto& block : model.parameters()) {
    const std::size_t need = block.value.size() * 4;
    if (bytes.size() - pos < need) {
      throw FormatError("corrupt block '" + block.name + "': expected " +
                        std::to_string(need) + " bytes, found " +
                        std::to_string(bytes.size() - pos));
    }
    for (auto& v : block.value) {
      v = std::bit_cast<float>(get_u32(bytes.data() + pos));
      pos += 4;
    }
  }
  if (pos != bytes.size()) {
    throw FormatError("corrupt block 'trailer': " + std::to_string(bytes.size() - pos) +
                      " unexpected trailing bytes");
  }
  return model;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Model<float>& model) {
  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + 4);
  put_u32(out, kCheckpointVersion);
  const std::string header = model.spec().to_text();
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& [name, values] : model.parameters()) {
    for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Model<float> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const ModelSpec spec = read_header(bytes, pos);
  return read_params(bytes, pos, spec);
}

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint '" + path.string() + "'");
}

Model<float> load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

Model<float> load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected) {
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  const ModelSpec spec = read_header(bytes, pos);
  if (!(spec == expected)) {
    throw FormatError("checkpoint '" + path.string() +
                      "' was written for an incompatible model:\n" + spec.to_text() +
                      "expected:\n" + expected.to_text());
  }
  return read_params(bytes, pos, spec);
}

}  // namespace valvenet
