#pragma once

#include <cstdint>
#include <string>

#include "bdlab/forms.hpp"

namespace bdlab::cache {

inline constexpr int format_version = 1;

// "BDLAB1\n", one header line, little-endian payload, 64-bit FNV-1a checksum of the payload
void write(const forms::CoefficientTable& table, const std::string& path);
forms::CoefficientTable read(const std::string& path);

std::uint64_t checksum(const unsigned char* data, std::size_t size);

// <dir>/<label>.bdc; reused when its n_max suffices, otherwise rebuilt and rewritten
forms::CoefficientTable load_or_build(const std::string& dir, const std::string& label, long n_max);

}  // namespace bdlab::cache
