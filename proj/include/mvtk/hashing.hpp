#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mvtk {

// Lowercase hex SHA-256, used as the image content hash.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view bytes);

// FNV-1a, 64 bit. Stable across platforms; used for deterministic choices
// keyed by ids (template selection).
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace mvtk
