#include "ae1svm/rng.hpp"

namespace ae1svm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xA5A5A5A5A5A5A5A5ull));
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(seed, stream));
}

}  // namespace ae1svm
