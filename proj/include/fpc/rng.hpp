#pragma once

#include <cstdint>
#include <random>

namespace fpc {

// Seeded generator with explicitly written transforms for the uniform and
// normal draws, so the sample streams are pinned by this code rather than by
// whatever std::normal_distribution a particular stdlib ships. mt19937_64
// itself is fully specified by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are generated together and the
  // spare is handed out on the next call.
  double normal();

  // Uniform integer in [0, n), unbiased (rejection on the top range).
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer; used for deterministic seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Stream-splitting rule for benchmark trials: a trial's seed depends only on
// (base_seed, cell_index, trial_index).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell_index,
                          std::uint64_t trial_index);

}  // namespace fpc
