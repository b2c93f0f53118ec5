#pragma once

#include <cstdint>
#include <random>

namespace genlab {

// splitmix64 step; used for seed derivation so streams stay decorrelated.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Stable seed combinators.  derive_seed(s, a) != derive_seed(s, b) for a != b
// in practice, and deriving with one salt never perturbs streams derived with
// another, so adding new roles is safe.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

// Salt tags for the independent random streams hanging off one master seed.
// Values are part of the reproducibility contract: renumbering them changes
// every derived stream.
namespace seed_role {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t train1 = 2;
inline constexpr std::uint64_t train2 = 3;
inline constexpr std::uint64_t test = 4;
inline constexpr std::uint64_t generator_init = 5;
inline constexpr std::uint64_t discriminator_init = 6;
inline constexpr std::uint64_t auxiliary_init = 7;
inline constexpr std::uint64_t latent_train = 8;
inline constexpr std::uint64_t latent_eval = 9;
inline constexpr std::uint64_t batch = 10;
inline constexpr std::uint64_t independent_init = 11;
inline constexpr std::uint64_t independent_batch = 12;
inline constexpr std::uint64_t independent_gen_samples = 13;
inline constexpr std::uint64_t embedding = 14;
inline constexpr std::uint64_t sweep_cell = 15;
}  // namespace seed_role

// Deterministic double-precision RNG: mt19937_64 bits, uniforms built from
// the top 53 bits, normals via Box-Muller (u1 in (0,1] so log never sees 0).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t index(std::uint64_t n);

  // Standard normal.
  double normal();

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace genlab
