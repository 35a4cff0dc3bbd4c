#include "lil/rng.hpp"

#include <cmath>
#include <numbers>

namespace lil {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline std::array<uint32_t, 4> round_once(const std::array<uint32_t, 4>& c,
                                          const std::array<uint32_t, 2>& k) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_unit(uint32_t hi, uint32_t lo) {
    uint64_t x = (static_cast<uint64_t>(hi) << 32) | lo;
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = round_once(counter, key);
    }
    return counter;
}

std::array<uint32_t, 4> PathRng::block(uint64_t index, bool init_space) const {
    uint64_t hi = path_id_;
    if (init_space) hi |= (1ull << 63);
    std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
        static_cast<uint32_t>(hi), static_cast<uint32_t>(hi >> 32)};
    std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_),
                                   static_cast<uint32_t>(seed_ >> 32)};
    return philox4x32(ctr, key);
}

std::array<double, 2> PathRng::uniform_pair(uint64_t index, bool init_space) const {
    auto b = block(index, init_space);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

std::array<double, 2> PathRng::normal_pair(uint64_t index, bool init_space) const {
    auto u = uniform_pair(index, init_space);
    double u1 = 1.0 - u[0];  // (0, 1]
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u[1];
    double s, c;
    __builtin_sincos(theta, &s, &c);
    return {r * c, r * s};
}

}  // namespace lil
