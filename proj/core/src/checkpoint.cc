#include "ip3o/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ip3o/errors.h"

namespace ip3o {

std::string encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json header = ckpt.header;
  header["format"] = kCheckpointFormat;
  header["version"] = kCheckpointVersion;
  header["count"] = ckpt.values.size();
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * ckpt.values.size());
  for (double v : ckpt.values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw std::runtime_error("checkpoint: missing header line");
  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") + e.what());
  }
  if (ckpt.header.value("format", "") != kCheckpointFormat) {
    throw std::runtime_error("checkpoint: not an ip3o checkpoint");
  }
  const auto count = ckpt.header.at("count").get<std::size_t>();
  const std::size_t payload = bytes.size() - nl - 1;
  if (payload != 8 * count) {
    throw ShapeError("checkpoint: header declares " + std::to_string(count) +
                     " values but payload holds " + std::to_string(payload) + " bytes");
  }
  ckpt.values.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[8 * i + b]) << (8 * b);
    ckpt.values[i] = std::bit_cast<double>(bits);
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace ip3o
