#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace rcising {

// Counter-based generator (Philox4x32-10, Salmon et al. 2011). A stream is
// identified by (seed, stream id); its output is a pure function of
// (seed, stream id, position), so independent chains can be replayed
// bit-for-bit regardless of scheduling.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (slot_ == 2) {
      block_ = generate(counter_++);
      slot_ = 0;
    }
    const auto lo = block_[2 * slot_];
    const auto hi = block_[2 * slot_ + 1];
    ++slot_;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform on {0, ..., n-1}; Lemire's multiply-and-reject, bias-free.
  std::uint64_t index(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Number of 128-bit blocks consumed so far.
  std::uint64_t position() const noexcept { return counter_; }

  // Child stream derived from this one's key; used to hand each replica or job
  // its own sequence.
  Philox split(std::uint64_t child) const noexcept {
    const std::uint64_t seed = (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
    return Philox(seed, mix(stream_ * 0x9E3779B97F4A7C15ULL + child + 1));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint32_t, 4> generate(std::uint64_t position) const noexcept {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(position),
                                     static_cast<std::uint32_t>(position >> 32),
                                     static_cast<std::uint32_t>(stream_),
                                     static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int slot_ = 2;
};

// Seed for independent job `job` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t job) noexcept {
  return Philox(seed, 0x6a6f6273ULL).split(job)();
}

}  // namespace rcising
