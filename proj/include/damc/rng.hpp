#ifndef DAMC_RNG_HPP
#define DAMC_RNG_HPP

#include <cstdint>
#include <random>

namespace damc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

// Deterministic random stream. Child streams are derived from the parent's
// seed and a tag (never from generator state), so a per-particle stream is
// the same no matter how work is scheduled across workers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  Rng child(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }
  Rng child(std::uint64_t a, std::uint64_t b) const {
    return Rng(mix_seed(mix_seed(seed_, a), b));
  }
  Rng child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return Rng(mix_seed(mix_seed(mix_seed(seed_, a), b), c));
  }

  std::uint64_t seed() const { return seed_; }

  double uniform() { return unif_(gen_); }
  double normal() { return norm_(gen_); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace damc

#endif
