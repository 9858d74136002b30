// Deterministic random streams. Every random quantity in the library flows
// from an explicit 64-bit seed through the recipe below, so artifacts are
// bit-reproducible across runs:
//
//   mix64(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
//             z *= 0x94D049BB133111EB; z ^= z>>31
//   stream:   state += 0x9E3779B97F4A7C15; output = mix64(state)   (splitmix64)
//   unit:     (output >> 11) * 2^-53                                in [0,1)
//   derive:   child_seed = mix64(seed ^ mix64(tag + 0x9E3779B97F4A7C15))
//   keyed bit/unit: chain derive over the key components, then mix64 once more.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pbc {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag + kGolden));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(seed, a, b), c);
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform double in [0,1), 53 bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    int next_bit() { return static_cast<int>(next_u64() & 1u); }

    // Samples an index from an explicit probability row by CDF inversion in
    // index order; residual rounding mass goes to the last index.
    int next_index(std::span<const double> probs) {
        double u = next_unit();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    RngStream derive(std::uint64_t tag) const { return RngStream(derive_seed(state_, tag)); }

  private:
    std::uint64_t state_;
};

// Counter-based shared randomness keyed by (block, layer, index). Encoder and
// decoders evaluate the same key and obtain the same value without
// coordination.
struct CommonRandomness {
    std::uint64_t seed = 0;

    double unit(int block, int layer, int index) const {
        std::uint64_t v = mix64(derive_seed(seed, static_cast<std::uint64_t>(block),
                                            static_cast<std::uint64_t>(layer),
                                            static_cast<std::uint64_t>(index)));
        return static_cast<double>(v >> 11) * 0x1.0p-53;
    }

    int bit(int block, int layer, int index) const {
        std::uint64_t v = mix64(derive_seed(seed, static_cast<std::uint64_t>(block),
                                            static_cast<std::uint64_t>(layer),
                                            static_cast<std::uint64_t>(index)));
        return static_cast<int>(v & 1u);
    }
};

}  // namespace pbc
