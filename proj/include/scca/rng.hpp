#pragma once

// Reproducible random number generation.
//
// All randomness in the library flows through Philox4x32-10, a counter-based
// generator: the stream is a pure function of (key, stream id, counter), so
// replicates and worker threads get independent streams by construction and
// identical seeds reproduce identical output on every platform.
//
// Normal variates use Wichura's AS 241 inverse normal CDF (PPND16) applied to
// a 53-bit uniform. One uniform in, one normal out; the method is fixed and
// documented here so sampled datasets are bit-stable across releases.

#include <cmath>
#include <cstdint>

#include "scca/errors.hpp"

namespace scca {

namespace detail {

// splitmix64 finalizer, used to mix seed components into stream ids.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Combine seed components into a derived stream id. Order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t h = detail::mix64(a);
  h = detail::mix64(h ^ detail::mix64(b + 0x9E3779B97F4A7C15ull));
  h = detail::mix64(h ^ detail::mix64(c + 0xC2B2AE3D27D4EB4Full));
  h = detail::mix64(h ^ detail::mix64(d + 0x165667B19E3779F9ull));
  return h;
}

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Key = 64-bit seed; counter words c2:c3 hold the stream id and c0:c1 the
// block index, so one seed supports 2^64 independent streams of 2^66 u32s.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return out_[4 - have_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform on the open interval (0, 1); 53 significant bits, never 0 or 1.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via the AS 241 inverse CDF.
  double next_normal() { return normal_icdf(next_uniform()); }

  // Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("next_below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t v = next_u64();
      if (v >= threshold) return v % n;
    }
  }

  // Inverse of the standard normal CDF (Wichura 1988, algorithm AS 241,
  // double-precision branch). Accurate to ~1e-16 relative over (0, 1).
  static double normal_icdf(double p) {
    if (!(p > 0.0 && p < 1.0))
      throw ArgumentError("normal_icdf: p must lie strictly inside (0, 1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
      const double r = 0.180625 - q * q;
      return q *
             (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) *
                      r +
                  4.5921953931549871457e4) *
                     r +
                 1.3731693765509461125e4) *
                    r +
                1.9715909503065514427e3) *
                   r +
               1.3314166789178437745e2) *
                  r +
              3.3871328727963666080e0) /
             (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                   3.9307895800092710610e4) *
                      r +
                  2.1213794301586595867e4) *
                     r +
                 5.3941960214247511077e3) *
                    r +
                6.8718700749205790830e2) *
                   r +
               4.2313330701600911252e1) *
                  r +
              1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
      r -= 1.6;
      v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
    } else {
      r -= 5.0;
      v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
    }
    return (q < 0.0) ? -v : v;
  }

  // The raw 10-round bijection on one counter block, exposed so reference
  // vectors can be checked against any (key, counter) pair directly.
  struct Block {
    std::uint32_t w[4];
  };
  static Block block(std::uint32_t k0, std::uint32_t k1, std::uint32_t c0,
                     std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) {
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {{c0, c1, c2, c3}};
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
  }

  void refill() {
    const Block b =
        block(key0_, key1_, static_cast<std::uint32_t>(block_),
              static_cast<std::uint32_t>(block_ >> 32), stream_lo_, stream_hi_);
    out_[0] = b.w[0];
    out_[1] = b.w[1];
    out_[2] = b.w[2];
    out_[3] = b.w[3];
    ++block_;
    have_ = 4;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
};

}  // namespace scca
