#ifndef LIL_RNG_HPP
#define LIL_RNG_HPP

#include <array>
#include <cstdint>

namespace lil {

/// Philox4x32-10 counter-based generator. One block maps a 128-bit counter
/// and a 64-bit key to 128 random bits; there is no sequential state, so
/// draws are addressable by index and streams are splittable by path id.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

/// Stateless stream of doubles for one (seed, path) pair. The draw index
/// addresses blocks directly: block k of path p under seed s is always the
/// same bits, independent of call order or thread schedule. The top bit of
/// the counter's high word separates initialization draws from step noise.
class PathRng {
public:
    PathRng(uint64_t seed, uint64_t path_id) : seed_(seed), path_id_(path_id) {}

    /// Two uniforms in [0,1) from block `index`.
    std::array<double, 2> uniform_pair(uint64_t index, bool init_space = false) const;

    /// Two standard normals from block `index` (Box-Muller; exactly one
    /// block consumed, so normal i of a run lives in block i/2, lane i%2).
    std::array<double, 2> normal_pair(uint64_t index, bool init_space = false) const;

    uint64_t seed() const { return seed_; }
    uint64_t path_id() const { return path_id_; }

private:
    std::array<uint32_t, 4> block(uint64_t index, bool init_space) const;
    uint64_t seed_;
    uint64_t path_id_;
};

}  // namespace lil

#endif  // LIL_RNG_HPP
