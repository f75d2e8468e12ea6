#pragma once

#include <cstdint>

namespace ksample {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based generator: the i-th output is a pure function of (key, i), so
// a stream can be reproduced from its key alone, independent of what other
// streams were drawn in between. Streams for independent work items are
// derived by chaining the identifying integers through the mixer.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : base_(key) {}

    static std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t stream,
                                    std::uint64_t substream) {
        std::uint64_t key = detail::mix64(master_seed + detail::kGolden);
        key = detail::mix64(key ^ (stream + detail::kGolden));
        key = detail::mix64(key ^ (substream + detail::kGolden));
        return key;
    }

    static CounterRng for_stream(std::uint64_t master_seed, std::uint64_t stream,
                                 std::uint64_t substream) {
        return CounterRng(derive_key(master_seed, stream, substream));
    }

    std::uint64_t next_u64() {
        counter_ += detail::kGolden;
        return detail::mix64(base_ + counter_);
    }

    // Uniform on [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe as a log or pow argument.
    double next_positive_double() { return 1.0 - next_double(); }

private:
    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace ksample
