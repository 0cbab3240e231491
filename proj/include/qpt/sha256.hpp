#pragma once

#include <string>
#include <string_view>

namespace qpt {

// Lowercase hex SHA-256 digest; backs the content-addressed result cache.
std::string sha256_hex(std::string_view data);

}  // namespace qpt
