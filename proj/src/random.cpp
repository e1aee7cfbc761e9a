#include "dchain/random.hpp"

#include <cmath>
#include <stdexcept>

namespace dchain {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
    for (std::uint64_t s = 0; s < stream; ++s) jump();
}

std::uint64_t RandomSource::next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

void RandomSource::jump() {
    static constexpr std::array<std::uint64_t, 4> kJump = {
        0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL, 0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::array<std::uint64_t, 4> acc{};
    for (std::uint64_t word : kJump) {
        for (int b = 0; b < 64; ++b) {
            if (word & (std::uint64_t{1} << b)) {
                for (int i = 0; i < 4; ++i) acc[i] ^= state_[i];
            }
            next();
        }
    }
    state_ = acc;
}

// Lemire's multiply-and-reject method; unbiased for every bound.
std::uint64_t RandomSource::uniform_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RandomSource::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool RandomSource::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
}

std::uint64_t RandomSource::geometric(double success) {
    if (!(success > 0.0)) throw std::invalid_argument("geometric: success probability must be positive");
    if (success >= 1.0) return 1;
    const double u = 1.0 - uniform01();  // (0, 1]
    const double draws = std::floor(std::log(u) / std::log1p(-success));
    if (draws >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
    return 1 + static_cast<std::uint64_t>(draws);
}

RandomSource RandomSource::split() { return RandomSource(next(), 0); }

}  // namespace dchain
