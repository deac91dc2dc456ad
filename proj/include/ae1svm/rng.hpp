#pragma once

#include <cstdint>
#include <random>

namespace ae1svm {

// All randomness fans out from one run seed through fixed stream ids.
// A new consumer takes a fresh id and never perturbs existing streams.
namespace streams {
inline constexpr std::uint64_t dataset = 0;
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t rff = 2;
inline constexpr std::uint64_t encoder_base = 100;   // + layer index
inline constexpr std::uint64_t decoder_base = 200;   // + layer index
inline constexpr std::uint64_t shuffle_base = 1000;  // + epoch index
}  // namespace streams

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace ae1svm
