#pragma once
// Stable digests used for cache keys, prompt hashes, and run provenance.
// SHA-256 is implemented locally so digests are identical on every platform
// and REPLAY mode needs no crypto library.

#include <cstdint>
#include <string>
#include <string_view>

namespace rave {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// FNV-1a 64-bit. Used to derive per-claim seeds from the run seed.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace rave
