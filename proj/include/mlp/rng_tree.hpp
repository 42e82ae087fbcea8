#pragma once

// Hierarchical, splittable random streams keyed by nodes of the index tree
// Theta = union over n of Z^n.
//
// Every node owns one stream. A stream yields exactly one uniform first
// (the random evaluation time), followed by standard Gaussians in
// consumption order. Streams are pure functions of (root seed, node), so
// sibling branches of the estimator can be evaluated in any order or in
// parallel with identical results.
//
// Construction (algorithm version 1):
//   root key   = BLAKE2b-256("mlp-rng/v1" || seed || label_0)
//   child key  = first 32 bytes of ChaCha20-IETF(key = parent, nonce = "K" || label)
//   word w     = 64-bit little-endian word w of ChaCha20-IETF(key, nonce = "D")
//   uniform    = ((w >> 11) + 0.5) * 2^-53        in (0, 1)
//   gaussian   = Phi^{-1}(uniform) via Wichura's AS241 (PPND16)

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlp {

inline constexpr int kRngAlgorithmVersion = 1;

/// A node of the random-source tree: a nonempty sequence of signed labels.
class ThetaIndex {
 public:
  explicit ThetaIndex(std::vector<std::int64_t> path);
  ThetaIndex(std::initializer_list<std::int64_t> path);

  std::span<const std::int64_t> path() const { return path_; }
  std::size_t size() const { return path_.size(); }
  std::string to_string() const;

  friend bool operator==(const ThetaIndex&, const ThetaIndex&) = default;

 private:
  std::vector<std::int64_t> path_;
};

/// Returns `parent` extended by the two labels (a, b).
ThetaIndex child(const ThetaIndex& parent, std::int64_t a, std::int64_t b);

/// 256-bit key identifying one stream. Extending a key by a label gives the
/// same result as hashing the extended ThetaIndex from scratch.
class StreamKey {
 public:
  using Bytes = std::array<std::uint8_t, 32>;

  static StreamKey root(std::uint64_t seed, std::int64_t first_label);

  StreamKey extend(std::int64_t label) const;
  StreamKey child(std::int64_t a, std::int64_t b) const { return extend(a).extend(b); }

  const Bytes& bytes() const { return bytes_; }

  friend bool operator==(const StreamKey&, const StreamKey&) = default;

 private:
  Bytes bytes_{};
};

StreamKey key_for(std::uint64_t seed, const ThetaIndex& theta);

/// Raised when the canonical draw order (uniform first, then Gaussians) is
/// violated.
class StreamMisuse : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Single-consumer draw sequence for one tree node.
class RandomStream {
 public:
  explicit RandomStream(const StreamKey& key);

  /// The node's uniform. Only valid as the very first draw.
  double draw_uniform();

  /// Fills `out` with independent standard normals; advances the cursor by out.size().
  void draw_gaussians(std::span<double> out);
  std::vector<double> draw_gaussian_vector(std::size_t d);

  /// Number of scalar draws consumed so far (uniform included).
  std::uint64_t cursor() const { return cursor_; }
  bool uniform_drawn() const { return uniform_drawn_; }

 private:
  static constexpr std::size_t kBufferWords = 32;

  std::uint64_t next_word();
  void refill(std::uint64_t block_word);

  StreamKey key_;
  std::uint64_t cursor_ = 0;
  std::uint64_t buffer_base_ = ~std::uint64_t{0};
  std::array<std::uint64_t, kBufferWords> buffer_{};
  bool uniform_drawn_ = false;
};

RandomStream stream_for(std::uint64_t seed, const ThetaIndex& theta);

/// Inverse of the standard normal CDF, p in (0, 1). Relative accuracy ~1e-16.
double standard_normal_quantile(double p);

}  // namespace mlp
