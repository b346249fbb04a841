#ifndef ISOMONO_FUCHSIAN_HPP
#define ISOMONO_FUCHSIAN_HPP

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "isomono/error.hpp"
#include "isomono/numkit/matrix2.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

/// Pole positions t = (t1, t2, t3); the remaining poles sit at 0, 1 and infinity.
struct PoleConfig
{
  std::array<complex, 3> t{complex(2), complex(3), complex(5)};

  PoleConfig() = default;
  PoleConfig(complex t1, complex t2, complex t3) : t{t1, t2, t3} {}
  explicit PoleConfig(const std::array<complex, 3>& tt) : t(tt) {}

  complex operator[](std::size_t i) const { return t[i]; }

  /// Smallest of |ti|, |ti - 1|, |ti - tj|.
  real separation() const
  {
    real m = std::abs(t[0] - t[1]);
    m = std::min({m, std::abs(t[0] - t[2]), std::abs(t[1] - t[2])});
    for (const complex& x : t) m = std::min({m, std::abs(x), std::abs(x - real(1))});
    return m;
  }

  bool valid(real margin = 0) const { return is_finite(t[0]) && is_finite(t[1]) && is_finite(t[2]) && separation() > margin; }

  void validate(real margin = 0) const
  {
    if (!valid(margin)) throw Error(ErrorCode::invalid_argument, "pole configuration leaves T (coincident poles)");
  }

  /// The five finite poles in label order 0, 1, t1, t2, t3.
  std::array<complex, 5> finite_poles() const { return {complex(0), complex(1), t[0], t[1], t[2]}; }

  real scale() const { return std::max({real(1), std::abs(t[0]), std::abs(t[1]), std::abs(t[2])}); }
};

enum class PoleLabel
{
  zero,
  one,
  t1,
  t2,
  t3,
  infinity
};

inline constexpr std::array<PoleLabel, 6> all_pole_labels{PoleLabel::zero, PoleLabel::one, PoleLabel::t1,
                                                           PoleLabel::t2,   PoleLabel::t3,  PoleLabel::infinity};

constexpr std::size_t index_of(PoleLabel p) { return static_cast<std::size_t>(p); }

constexpr const char* to_string(PoleLabel p)
{
  switch (p) {
    case PoleLabel::zero: return "0";
    case PoleLabel::one: return "1";
    case PoleLabel::t1: return "t1";
    case PoleLabel::t2: return "t2";
    case PoleLabel::t3: return "t3";
    case PoleLabel::infinity: return "inf";
  }
  return "?";
}

inline bool is_finite_pole(PoleLabel p) { return p != PoleLabel::infinity; }

inline complex position(const PoleConfig& pc, PoleLabel p)
{
  switch (p) {
    case PoleLabel::zero: return 0;
    case PoleLabel::one: return 1;
    case PoleLabel::t1: return pc.t[0];
    case PoleLabel::t2: return pc.t[1];
    case PoleLabel::t3: return pc.t[2];
    case PoleLabel::infinity: break;
  }
  throw Error(ErrorCode::invalid_argument, "pole at infinity has no finite position");
}

/// Residue eigenvalues: {0, -1/2} over 0, 1, infinity and {0, 1/2} over t1, t2, t3.
inline std::array<real, 2> local_exponents(PoleLabel p)
{
  const bool positive = p == PoleLabel::t1 || p == PoleLabel::t2 || p == PoleLabel::t3;
  return {real(0), positive ? real(0.5) : real(-0.5)};
}

/// Point (z, c) of the chart C^6 over a fixed pole configuration.
struct FuchsianSystem
{
  PoleConfig poles;
  std::array<complex, 3> z{};
  std::array<complex, 3> c{};

  real scale() const
  {
    real s = 1;
    for (int i = 0; i < 3; ++i) s = std::max({s, std::abs(z[i]), std::abs(c[i])});
    return s;
  }
};

/// Residue at a pole of A = nabla_0 + sum ci Theta_i.
inline Matrix2 residue(const FuchsianSystem& s, PoleLabel p)
{
  const auto& z = s.z;
  const auto& c = s.c;
  switch (p) {
    case PoleLabel::zero: {
      complex low = 0;
      for (int i = 0; i < 3; ++i) low += c[i] * (real(1) - z[i]);
      return {0, 0, low, -0.5};
    }
    case PoleLabel::one: {
      complex S = 0;
      for (int i = 0; i < 3; ++i) S += c[i] * z[i];
      return {S, -0.5 - S, S, -0.5 - S};
    }
    case PoleLabel::t1:
    case PoleLabel::t2:
    case PoleLabel::t3: {
      const std::size_t i = index_of(p) - 2;
      const complex zi = z[i], ci = c[i];
      return {-ci * zi, zi / real(2) + ci * zi * zi, -ci, 0.5 + ci * zi};
    }
    case PoleLabel::infinity: {
      Matrix2 sum = Matrix2::zero();
      for (std::size_t k = 0; k < 5; ++k) sum += residue(s, all_pole_labels[k]);
      return -sum;
    }
  }
  return Matrix2::zero();
}

/// A(x) with nabla = d + A(x) dx.
inline Matrix2 connection_coefficient(const FuchsianSystem& s, complex x)
{
  const auto poles = s.poles.finite_poles();
  Matrix2 A = Matrix2::zero();
  for (std::size_t k = 0; k < 5; ++k) {
    const complex dx = x - poles[k];
    if (std::abs(dx) <= real(1e-14) * std::max(real(1), std::abs(poles[k])))
      throw Error(ErrorCode::pole_evaluation, std::string("connection evaluated at pole ") + to_string(all_pole_labels[k]));
    A += residue(s, all_pole_labels[k]) / dx;
  }
  return A;
}

/// Projective point [u:v]; normalized to v = 1 unless the point is [1:0].
struct ProjectivePoint
{
  complex u{1}, v{0};
  /// Set when v vanishes, i.e. the direction is the point at infinity of the affine chart u/v.
  bool at_chart_infinity = false;

  complex affine() const { return u / v; }
};

inline ProjectivePoint normalize_projective(complex u, complex v, real rel_eps = 1e-13)
{
  const real n = std::max(std::abs(u), std::abs(v));
  if (n == 0) throw Error(ErrorCode::degenerate_spectrum, "zero eigenvector");
  if (std::abs(v) <= rel_eps * n) return {1, 0, true};
  return {u / v, 1, false};
}

/// Eigendirection of the residue at `pole` for eigenvalue `lambda` (one of the local exponents).
inline ProjectivePoint eigendirection(const FuchsianSystem& s, PoleLabel pole, real lambda)
{
  const auto ex = local_exponents(pole);
  if (std::abs(lambda - ex[0]) > 1e-12 && std::abs(lambda - ex[1]) > 1e-12)
    throw Error(ErrorCode::invalid_argument, std::string("eigenvalue is not a local exponent at ") + to_string(pole));
  const Matrix2 R = residue(s, pole);
  // rows of R - lambda: (a - l, b) and (c, d - l); kernel candidates are the row perpendiculars
  const std::array<complex, 2> v1{R.b, lambda - R.a};
  const std::array<complex, 2> v2{lambda - R.d, R.c};
  const real n1 = std::hypot(std::abs(v1[0]), std::abs(v1[1]));
  const real n2 = std::hypot(std::abs(v2[0]), std::abs(v2[1]));
  if (std::max(n1, n2) == 0) throw Error(ErrorCode::degenerate_spectrum, "residue is scalar");
  return n1 >= n2 ? normalize_projective(v1[0], v1[1]) : normalize_projective(v2[0], v2[1]);
}

struct SigmaMembership
{
  bool in_sigma = false;
  complex Q0{}, Q1{}, Qinf{};
  complex reducible_residual{};
  real defect = 0;
};

inline complex q_zero(const PoleConfig& pc, const std::array<complex, 3>& c)
{
  const auto& t = pc.t;
  return t[1] * t[2] * c[0] + t[0] * t[2] * c[1] + t[0] * t[1] * c[2];
}

inline complex q_infinity(const PoleConfig& pc, const std::array<complex, 3>& c)
{
  return pc.t[0] * c[0] + pc.t[1] * c[1] + pc.t[2] * c[2];
}

inline SigmaMembership sigma_membership(const FuchsianSystem& s, real tol)
{
  SigmaMembership m;
  m.defect = std::max({std::abs(s.z[0] - s.z[1]), std::abs(s.z[1] - s.z[2]), std::abs(s.c[0] + s.c[1] + s.c[2])});
  m.in_sigma = m.defect < tol;
  m.Q0 = q_zero(s.poles, s.c);
  m.Qinf = q_infinity(s.poles, s.c);
  m.Q1 = m.Q0 + m.Qinf;
  const complex z = s.z[0];
  m.reducible_residual = m.Q0 * z + m.Q1 * (z - real(1)) + m.Qinf;
  return m;
}

/// The point (z, z, z; c1, c2, -c1-c2) of Sigma.
inline FuchsianSystem sigma_point(const PoleConfig& pc, complex z, complex c1, complex c2)
{
  return FuchsianSystem{pc, {z, z, z}, {c1, c2, -c1 - c2}};
}

}
#endif
