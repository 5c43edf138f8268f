#pragma once

#include <cstdint>
#include <limits>

namespace hompol {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

} // namespace detail

/// Counter-based generator: the i-th output is a hash of (key, i), and the
/// key is derived from (seed, stream, substream). Work items keyed by e.g.
/// (seed, setting, resample) get the same numbers whatever thread runs them.
class KeyedRng {
  public:
    using result_type = std::uint64_t;

    KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
        : key_(detail::splitmix64(
              detail::splitmix64(detail::splitmix64(seed) ^ stream) ^
              (substream * 0xd1342543de82ef95ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        return detail::splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace hompol
