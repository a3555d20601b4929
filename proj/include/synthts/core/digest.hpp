#ifndef SYNTHTS_CORE_DIGEST_HPP
#define SYNTHTS_CORE_DIGEST_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace synthts {

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace synthts

#endif  // SYNTHTS_CORE_DIGEST_HPP
