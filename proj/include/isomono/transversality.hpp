#ifndef ISOMONO_TRANSVERSALITY_HPP
#define ISOMONO_TRANSVERSALITY_HPP

#include <array>
#include <cmath>

#include "isomono/darboux.hpp"
#include "isomono/error.hpp"
#include "isomono/fuchsian.hpp"
#include "isomono/garnier.hpp"
#include "isomono/numkit/linalg.hpp"

namespace isomono
{

/// A value together with the magnitude of its largest monomial, for relative vanishing tests.
struct ScaledValue
{
  complex value{};
  real scale = 0;

  bool vanishes(real rel) const { return std::abs(value) < rel * scale; }
};

/// det(Vi . Fj) on Sigma^Darb in closed form.
inline ScaledValue transversality_det_closed_scaled(const PoleConfig& pc, complex p1, complex p2, complex q3)
{
  if (std::abs(q3) <= real(1e-14) || std::abs(q3 - real(1)) <= real(1e-14))
    throw Error(ErrorCode::pole_of_formula, "q3 in {0, 1}");
  const auto& t = pc.t;
  const complex m1 = t[0] * t[1] * t[2] * (q3 - real(1)) * (q3 - real(1)) * p1;
  const complex m2 = (t[0] - real(1)) * (t[1] - real(1)) * (t[2] - real(1)) * q3 * q3 * p2;
  const complex den = real(8) * (t[0] - t[1]) * (t[1] - t[2]) * (t[0] - t[2]) * q3 * q3 * (q3 - real(1)) * (q3 - real(1));
  return {(m1 + m2) / den, (std::abs(m1) + std::abs(m2)) / std::abs(den)};
}

inline complex transversality_det_closed(const PoleConfig& pc, complex p1, complex p2, complex q3)
{
  return transversality_det_closed_scaled(pc, p1, p2, q3).value;
}

inline complex transversality_det_closed(const PoleConfig& pc, const SigmaDarbPoint& s)
{
  return transversality_det_closed(pc, s.p1, s.p2, s.q3);
}

/// Rows (dHi/dp1, dHi/dp2, -dHi/dq3) at (0, 1, q3; p1, p2, 0).
inline std::array<std::array<complex, 3>, 3> transversality_matrix(const PoleConfig& pc, complex p1, complex p2, complex q3,
                                                                    PLinearTerm form = PLinearTerm::trace_connection)
{
  const DarbouxPoint d = SigmaDarbPoint{p1, p2, q3}.full();
  const GarnierPolys polys(pc, form);
  std::array<std::array<complex, 3>, 3> m{};
  for (int i = 1; i <= 3; ++i) {
    const auto g = hamiltonian_gradient(pc, d, i, polys);
    m[static_cast<std::size_t>(i - 1)] = {g.dp[0], g.dp[1], -g.dq[2]};
  }
  return m;
}

/// Determinant of transversality_matrix. With the log-derivative-of-F linear term it equals the closed form;
/// with the trace-connection term it equals minus the closed form.
inline complex transversality_det_numeric(const PoleConfig& pc, complex p1, complex p2, complex q3,
                                          PLinearTerm form = PLinearTerm::trace_connection)
{
  return det3(transversality_matrix(pc, p1, p2, q3, form));
}

/// Q0 z + Q1 (z - 1) + Qinf at a Sigma point.
inline ScaledValue reducible_residual_sigma_scaled(const PoleConfig& pc, complex z, const std::array<complex, 3>& c,
                                                   real sigma_tol = 1e-10)
{
  const real cs = std::max({real(1), std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
  if (std::abs(c[0] + c[1] + c[2]) > sigma_tol * cs) throw Error(ErrorCode::not_in_sigma, "c1 + c2 + c3 != 0");
  const auto m = sigma_membership(FuchsianSystem{pc, {z, z, z}, c}, sigma_tol);
  return {m.reducible_residual, std::abs(m.Q0 * z) + std::abs(m.Q1 * (z - real(1))) + std::abs(m.Qinf)};
}

inline complex reducible_residual_sigma(const PoleConfig& pc, complex z, const std::array<complex, 3>& c)
{
  return reducible_residual_sigma_scaled(pc, z, c).value;
}

/// z on the reducible locus of Sigma for given c: Q0 / (Qinf + 2 Q0).
inline complex reducible_z(const PoleConfig& pc, const std::array<complex, 3>& c)
{
  const complex Q0 = q_zero(pc, c), Qi = q_infinity(pc, c);
  const complex den = Qi + real(2) * Q0;
  if (std::abs(den) <= real(1e-14) * std::max(std::abs(Qi), std::abs(Q0)))
    throw Error(ErrorCode::degenerate_input, "Qinf + 2 Q0 = 0: no reducible point with this c");
  return Q0 / den;
}

/// Symmetric matrix of a quadratic form in (Z1, Z2, Z3).
struct ConicForm
{
  std::array<std::array<complex, 3>, 3> m{};

  complex det() const { return det3(m); }

  real scale() const
  {
    real s = 0;
    for (const auto& row : m)
      for (const complex& v : row) s = std::max(s, std::abs(v));
    return s;
  }

  complex operator()(const std::array<complex, 3>& Z) const
  {
    complex s = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) s += m[i][j] * Z[i] * Z[j];
    return s;
  }
};

struct ConicResult
{
  ConicForm form;
  complex det{};
  bool smooth = true;
};

/// Tangent cone along Syst at the Sigma point (t, z1, c1, c2); cross terms split evenly off the diagonal.
inline ConicResult tangent_cone_conic(const PoleConfig& pc, complex z1, complex c1, complex c2, real tol = 1e-8)
{
  const auto& t = pc.t;
  const complex t1 = t[0], t2 = t[1], t3 = t[2];
  const complex a12 = (real(2) * t2 * z1 - t2 - z1) * (t1 - t3);
  const complex a13 = -(real(2) * t3 * z1 - t3 - z1) * (t1 - t2);
  const complex a23 = -c1 * (real(2) * t2 - real(1)) * (t1 - t3) -
                      c2 * (real(2) * t1 * t2 + real(2) * t3 * t1 - real(4) * t3 * t2 - real(2) * t1 + t2 + t3);
  const complex a22 = c2 * (real(2) * t2 - real(1)) * (t1 - t3);
  const complex a33 = (t3 - real(1)) * (t1 - t2) * (c1 + c2);
  ConicResult r;
  r.form.m = {{{0, a12 / real(2), a13 / real(2)}, {a12 / real(2), a22, a23 / real(2)}, {a13 / real(2), a23 / real(2), a33}}};
  r.det = r.form.det();
  const real s = r.form.scale();
  r.smooth = std::abs(r.det) > tol * s * s * s;
  return r;
}

}
#endif
