#ifndef HRLME_CHECKPOINT_HPP
#define HRLME_CHECKPOINT_HPP

#include "hrlme/nnkit.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hrlme {

// Binary layout (all integers little-endian):
//   magic "HRLMCKPT" | u32 version | u32 entry count
//   per entry: u32 name length | name bytes | u32 rows | u32 cols | u64 byte offset
//   data section: row-major float64 values, offsets relative to its start.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::vector<std::pair<std::string, nn::Matrix>> entries;

  const nn::Matrix& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  void put(const std::string& name, const nn::Matrix& value);

  bool operator==(const Checkpoint& other) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Appends every value of params under its own name.
void export_params(const nn::ParamSet& params, Checkpoint& ckpt);
/// Copies values by name; shapes must match.
void import_params(const Checkpoint& ckpt, nn::ParamSet& params);

}  // namespace hrlme

#endif  // HRLME_CHECKPOINT_HPP
