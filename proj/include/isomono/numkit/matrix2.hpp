#ifndef ISOMONO_NUMKIT_MATRIX2_HPP
#define ISOMONO_NUMKIT_MATRIX2_HPP

#include <algorithm>
#include <array>
#include <ostream>

#include "isomono/numkit/scalar.hpp"

namespace isomono
{

/// Two-by-two complex matrix (a b; c d).
struct Matrix2
{
  complex a{}, b{}, c{}, d{};

  static constexpr Matrix2 identity() { return {1, 0, 0, 1}; }
  static constexpr Matrix2 zero() { return {0, 0, 0, 0}; }
  static constexpr Matrix2 diagonal(complex x, complex y) { return {x, 0, 0, y}; }

  complex det() const { return a * d - b * c; }
  complex trace() const { return a + d; }

  Matrix2 inverse() const
  {
    const complex D = det();
    return {d / D, -b / D, -c / D, a / D};
  }

  Matrix2 transpose() const { return {a, c, b, d}; }

  /// Largest entry modulus.
  real max_abs() const
  {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }

  real frobenius() const
  {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  }

  bool finite() const { return is_finite(a) && is_finite(b) && is_finite(c) && is_finite(d); }

  std::array<complex, 2> apply(const std::array<complex, 2>& v) const
  {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }

  Matrix2& operator+=(const Matrix2& o)
  {
    a += o.a; b += o.b; c += o.c; d += o.d;
    return *this;
  }
  Matrix2& operator-=(const Matrix2& o)
  {
    a -= o.a; b -= o.b; c -= o.c; d -= o.d;
    return *this;
  }
  Matrix2& operator*=(complex s)
  {
    a *= s; b *= s; c *= s; d *= s;
    return *this;
  }
};

inline Matrix2 operator+(Matrix2 x, const Matrix2& y) { return x += y; }
inline Matrix2 operator-(Matrix2 x, const Matrix2& y) { return x -= y; }
inline Matrix2 operator-(const Matrix2& x) { return {-x.a, -x.b, -x.c, -x.d}; }
inline Matrix2 operator*(Matrix2 x, complex s) { return x *= s; }
inline Matrix2 operator*(complex s, Matrix2 x) { return x *= s; }
inline Matrix2 operator/(Matrix2 x, complex s) { return x *= (complex(1) / s); }

inline Matrix2 operator*(const Matrix2& x, const Matrix2& y)
{
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline real max_abs_diff(const Matrix2& x, const Matrix2& y) { return (x - y).max_abs(); }

inline std::ostream& operator<<(std::ostream& os, const Matrix2& m)
{
  return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
}

}
#endif
