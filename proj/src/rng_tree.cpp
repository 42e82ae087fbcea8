#include "mlp/rng_tree.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <sstream>

namespace mlp {
namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialisation failed");
    }
    return true;
  }();
  (void)ready;
}

void put_le64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

std::uint64_t get_le64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= std::uint64_t{in[i]} << (8 * i);
  }
  return v;
}

constexpr char kRootTag[] = "mlp-rng/v1";

// Nonce prefixes separate key derivation from draw generation.
constexpr std::uint8_t kDeriveDomain = 0x4b;  // 'K'
constexpr std::uint8_t kDrawDomain = 0x44;    // 'D'

}  // namespace

ThetaIndex::ThetaIndex(std::vector<std::int64_t> path) : path_(std::move(path)) {
  if (path_.empty()) {
    throw std::invalid_argument("ThetaIndex must have at least one label");
  }
}

ThetaIndex::ThetaIndex(std::initializer_list<std::int64_t> path)
    : ThetaIndex(std::vector<std::int64_t>(path)) {}

std::string ThetaIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i != 0) os << ',';
    os << path_[i];
  }
  os << ')';
  return os.str();
}

ThetaIndex child(const ThetaIndex& parent, std::int64_t a, std::int64_t b) {
  std::vector<std::int64_t> path(parent.path().begin(), parent.path().end());
  path.push_back(a);
  path.push_back(b);
  return ThetaIndex(std::move(path));
}

StreamKey StreamKey::root(std::uint64_t seed, std::int64_t first_label) {
  ensure_sodium();
  std::uint8_t msg[sizeof(kRootTag) - 1 + 16];
  std::memcpy(msg, kRootTag, sizeof(kRootTag) - 1);
  put_le64(msg + sizeof(kRootTag) - 1, seed);
  put_le64(msg + sizeof(kRootTag) - 1 + 8, static_cast<std::uint64_t>(first_label));
  StreamKey key;
  crypto_generichash(key.bytes_.data(), key.bytes_.size(), msg, sizeof(msg), nullptr, 0);
  return key;
}

StreamKey StreamKey::extend(std::int64_t label) const {
  std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  nonce[0] = kDeriveDomain;
  put_le64(nonce + 4, static_cast<std::uint64_t>(label));
  StreamKey next;
  crypto_stream_chacha20_ietf(next.bytes_.data(), next.bytes_.size(), nonce, bytes_.data());
  return next;
}

StreamKey key_for(std::uint64_t seed, const ThetaIndex& theta) {
  auto labels = theta.path();
  StreamKey key = StreamKey::root(seed, labels[0]);
  for (std::size_t i = 1; i < labels.size(); ++i) {
    key = key.extend(labels[i]);
  }
  return key;
}

RandomStream::RandomStream(const StreamKey& key) : key_(key) { ensure_sodium(); }

void RandomStream::refill(std::uint64_t block_word) {
  static_assert(kBufferWords % 8 == 0, "buffer must hold whole ChaCha blocks");
  std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  nonce[0] = kDrawDomain;
  std::uint8_t bytes[kBufferWords * 8] = {};
  const auto block = static_cast<std::uint32_t>(block_word / 8);
  crypto_stream_chacha20_ietf_xor_ic(bytes, bytes, sizeof(bytes), nonce, block,
                                     key_.bytes().data());
  for (std::size_t i = 0; i < kBufferWords; ++i) {
    buffer_[i] = get_le64(bytes + 8 * i);
  }
  buffer_base_ = block_word;
}

std::uint64_t RandomStream::next_word() {
  if (cursor_ < buffer_base_ || cursor_ >= buffer_base_ + kBufferWords) {
    refill(cursor_ - cursor_ % kBufferWords);
  }
  return buffer_[cursor_++ - buffer_base_];
}

namespace {
double to_open_unit(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

double RandomStream::draw_uniform() {
  if (cursor_ != 0) {
    throw StreamMisuse("draw_uniform must be the first draw on a stream");
  }
  uniform_drawn_ = true;
  return to_open_unit(next_word());
}

void RandomStream::draw_gaussians(std::span<double> out) {
  for (double& z : out) {
    z = standard_normal_quantile(to_open_unit(next_word()));
  }
}

std::vector<double> RandomStream::draw_gaussian_vector(std::size_t d) {
  if (d == 0) {
    throw std::invalid_argument("draw_gaussian_vector requires d >= 1");
  }
  std::vector<double> out(d);
  draw_gaussians(out);
  return out;
}

RandomStream stream_for(std::uint64_t seed, const ThetaIndex& theta) {
  return RandomStream(key_for(seed, theta));
}

// Wichura, Algorithm AS241 (PPND16).
double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw std::domain_error("standard_normal_quantile: p outside [0,1]");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace mlp
