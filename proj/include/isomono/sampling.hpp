#ifndef ISOMONO_SAMPLING_HPP
#define ISOMONO_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "isomono/fuchsian.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

using Rng = std::mt19937_64;

/// Uniform in [lo, hi); built from raw engine bits so streams agree across standard libraries.
inline real uniform(Rng& rng, real lo, real hi)
{
  const real u = static_cast<real>(rng() >> 11) * real(0x1.0p-53);
  return lo + (hi - lo) * u;
}

/// Uniform in the square [-s, s] x [-s, s].
inline complex uniform_complex(Rng& rng, real s = 1)
{
  const real re = uniform(rng, -s, s);
  const real im = uniform(rng, -s, s);
  return {re, im};
}

struct PoleBox
{
  real half_width = 3;
  /// Minimum distance of each ti from 0, 1 and the other tj.
  real guard = 0.3;
};

/// Rejection sample of t in the box, away from 0, 1 and each other.
inline PoleConfig sample_poles(Rng& rng, const PoleBox& box = {})
{
  for (;;) {
    PoleConfig pc(uniform_complex(rng, box.half_width), uniform_complex(rng, box.half_width),
                  uniform_complex(rng, box.half_width));
    if (pc.separation() > box.guard) return pc;
  }
}

inline std::uint64_t case_seed(std::uint64_t seed, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t(words[0]) << 32) | words[1];
}

}
#endif
