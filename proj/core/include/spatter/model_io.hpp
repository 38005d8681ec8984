#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "spatter/models.hpp"

namespace spatter {

// Binary container: an 8-byte magic, a format version, then tagged sections
// each carrying its own crc32. Integers are little-endian; probabilities and
// weights are stored as their IEEE-754 bit patterns.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize(const ModelSet& models);
ModelSet deserialize_model(const std::string& bytes);

std::string serialize(const ClassSet& classes);
ClassSet deserialize_classes(const std::string& bytes);

/// Throws Io on filesystem failure; BadModelFile, VersionMismatch or
/// ChecksumMismatch on a bad file.
void save_model(const ModelSet& models, const std::filesystem::path& path);
ModelSet load_model(const std::filesystem::path& path);

void save_classes(const ClassSet& classes, const std::filesystem::path& path);
ClassSet load_classes(const std::filesystem::path& path);

}  // namespace spatter
