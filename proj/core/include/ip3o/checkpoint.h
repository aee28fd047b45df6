#ifndef IP3O_CHECKPOINT_H_
#define IP3O_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ip3o {

// On-disk parameter snapshot: one line of JSON (the header, terminated by
// '\n') followed by header["count"] little-endian IEEE-754 float64 values.
//
// The header always carries "format" = "ip3o-checkpoint", "version" and
// "count"; callers add their own layout description, e.g. a "modules" array
// of {name, layer_sizes, extra}.
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> values;
};

inline constexpr const char* kCheckpointFormat = "ip3o-checkpoint";
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws ShapeError when the payload length disagrees with the header and
// std::runtime_error when the file is unreadable or not a checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace ip3o

#endif  // IP3O_CHECKPOINT_H_
