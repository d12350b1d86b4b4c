#pragma once

// Seed derivation for every random draw in the library.
//
// A 64-bit master seed is mixed with an operation tag and up to two indices
// through SplitMix64 finalizers. The result seeds an independent stream, so
// any single draw (trial t, readout r, ...) can be reproduced in isolation
// without replaying earlier draws.

#include <cstdint>
#include <random>
#include <string_view>

#include "subridge/common.hpp"

namespace subridge {

enum class StreamTag : std::uint64_t {
  ground_truth = 0x7472757468ULL,
  plan = 0x706c616eULL,
  dataset = 0x64617461ULL,
  label_noise = 0x6c61626eULL,
  training_noise = 0x7472616eULL,
  eval_noise = 0x6576616cULL,
  trial = 0x747269616cULL,
  classifier_subset = 0x63737562ULL,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                          std::uint64_t index = 0,
                          std::uint64_t sub_index = 0) noexcept;

// Small counter-based engine, cheap to construct per (readout, example).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

// Bulk stream used for datasets, plans and training noise.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(Vector& v);
  void fill_normal(Matrix& m);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace subridge
