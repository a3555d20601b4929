#ifndef SYNTHTS_CORE_BINARY_IO_HPP
#define SYNTHTS_CORE_BINARY_IO_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace synthts {

// Little-endian float32 encoding, independent of host byte order.
std::vector<std::byte> float32_le_bytes(std::span<const float> values);
std::vector<float> float32_from_le(std::span<const std::byte> bytes);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace synthts

#endif  // SYNTHTS_CORE_BINARY_IO_HPP
