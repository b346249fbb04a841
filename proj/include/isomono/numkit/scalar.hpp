#ifndef ISOMONO_NUMKIT_SCALAR_HPP
#define ISOMONO_NUMKIT_SCALAR_HPP

#include <cmath>
#include <complex>
#include <numbers>

namespace isomono
{

// Single switch point for the working precision. Everything downstream is
// written against these aliases; only double is exercised by the test suite.
#ifndef ISOMONO_REAL_TYPE
#define ISOMONO_REAL_TYPE double
#endif

using real = ISOMONO_REAL_TYPE;
using complex = std::complex<real>;

inline constexpr real pi = std::numbers::pi_v<real>;
inline constexpr complex I{0, 1};

inline bool is_finite(const complex& z)
{
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}
#endif
