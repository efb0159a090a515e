#pragma once

#include <string>
#include <string_view>

namespace phishtriage {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Stable record identifier: digest of the source tag and the raw input bytes,
/// shortened to 24 hex characters.
std::string content_id(std::string_view raw, std::string_view source);

}  // namespace phishtriage
