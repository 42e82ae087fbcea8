#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace mlp {

/// Shortest round-trip-exact decimal text: printf "%.17g".
std::string format_double(double v);

/// Hex BLAKE2b-256 digest of `text`.
std::string digest_hex(std::string_view text);

/// Runs body(i) for i in [0, count) on up to `threads` worker threads
/// (0 = hardware concurrency). Results must be written to per-index slots;
/// the first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace mlp
