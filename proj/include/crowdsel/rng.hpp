#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crowdsel {

using Rng = std::mt19937_64;

/// Tags that separate the independent random streams of one run.
enum class Stream : std::uint32_t {
  model_init = 1,
  answers = 2,
  truth = 3,
  evaluation = 4,
  generator = 5,
  first_batch = 6,
  probe = 7,
};

/// Engine seeded from (seed, tags...) through std::seed_seq, whose output is
/// fixed by the standard, so streams reproduce across platforms.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> tags = {});
Rng make_rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint32_t> tags = {});

/// Uniform on [0,1).
double uniform01(Rng& rng);
double standard_normal(Rng& rng);

}  // namespace crowdsel
