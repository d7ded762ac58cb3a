#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mmsim/policy.hpp"

namespace mmsim {

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint: a header (role, shapes, action box, observation scaling,
/// config hash, optimizer) followed by every parameter as a hex float, so a
/// save/load cycle is bit-exact.
void write_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
/// Throws CheckpointError when the file is missing, truncated, or of an
/// unsupported version.
PolicyParams load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the parameter bytes; equal hashes mean bit-identical weights.
std::uint64_t parameter_hash(const PolicyParams& params) noexcept;

}  // namespace mmsim
