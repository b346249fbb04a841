#ifndef ISOMONO_DARBOUX_HPP
#define ISOMONO_DARBOUX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "isomono/error.hpp"
#include "isomono/fuchsian.hpp"
#include "isomono/numkit/linalg.hpp"
#include "isomono/numkit/polynomial.hpp"

namespace isomono
{

struct DarbouxPoint
{
  std::array<complex, 3> q{};
  std::array<complex, 3> p{};

  real scale() const
  {
    real s = 1;
    for (int k = 0; k < 3; ++k) s = std::max({s, std::abs(q[k]), std::abs(p[k])});
    return s;
  }

  ComplexVector flat() const { return {q[0], q[1], q[2], p[0], p[1], p[2]}; }
  static DarbouxPoint from_flat(const ComplexVector& v) { return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}}; }
};

/// (z1, z2, z3, c1, c2, c3) as a flat pair.
struct ZC
{
  std::array<complex, 3> z{};
  std::array<complex, 3> c{};

  ComplexVector flat() const { return {z[0], z[1], z[2], c[0], c[1], c[2]}; }
  FuchsianSystem system(const PoleConfig& pc) const { return {pc, z, c}; }
};

inline real min_q_gap(const DarbouxPoint& d)
{
  return std::min({std::abs(d.q[0] - d.q[1]), std::abs(d.q[0] - d.q[2]), std::abs(d.q[1] - d.q[2])});
}

namespace detail
{

inline std::array<std::size_t, 2> others(std::size_t i)
{
  return {i == 0 ? 1u : 0u, i == 2 ? 1u : 2u};
}

/// Lambda with pole positions tt (one of them possibly replaced by 1).
inline complex lambda_sum(const DarbouxPoint& d, const std::array<complex, 3>& tt)
{
  complex s = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [j, k] = others(i);
    const complex qi = d.q[i];
    s += d.p[i] * (qi - tt[0]) * (qi - tt[1]) * (qi - tt[2]) / ((qi - d.q[j]) * (qi - d.q[k]));
  }
  return s;
}

inline real lambda_magnitude(const DarbouxPoint& d, const std::array<complex, 3>& tt)
{
  real s = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [j, k] = others(i);
    const complex qi = d.q[i];
    s += std::abs(d.p[i] * (qi - tt[0]) * (qi - tt[1]) * (qi - tt[2]) / ((qi - d.q[j]) * (qi - d.q[k])));
  }
  return s;
}

}

inline void check_q_distinct(const DarbouxPoint& d, real rel = 1e-10)
{
  if (min_q_gap(d) <= rel * d.scale())
    throw Error(ErrorCode::critical_locus, "q-collision (q1-q2)(q2-q3)(q1-q3) = 0");
}

/// Lambda as defined from (q, p) and t.
inline complex darboux_lambda(const PoleConfig& pc, const DarbouxPoint& d) { return detail::lambda_sum(d, pc.t); }

/// The degree-6 map (q, p) -> (z, c).
inline ZC psi(const PoleConfig& pc, const DarbouxPoint& d)
{
  check_q_distinct(d);
  const auto& t = pc.t;
  const complex L = detail::lambda_sum(d, t);
  if (std::abs(L) <= real(1e-14) * detail::lambda_magnitude(d, t) || L == complex(0))
    throw Error(ErrorCode::lambda_degenerate, "Lambda = 0");
  ZC out;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [j, k] = detail::others(i);
    const complex ti = t[i];
    out.c[i] = -(d.q[0] - ti) * (d.q[1] - ti) * (d.q[2] - ti) / (ti * (ti - real(1)) * (ti - t[j]) * (ti - t[k])) * L;
    std::array<complex, 3> tt = t;
    tt[i] = 1;
    out.z[i] = ti * detail::lambda_sum(d, tt) / L;
  }
  return out;
}

/// Numerator N(x) = sum ci ((zi - ti) x - ti (zi - 1)) prod_{j != i} (x - tj) of the (2,1) entry.
inline ComplexPoly q_polynomial(const PoleConfig& pc, const std::array<complex, 3>& z, const std::array<complex, 3>& c)
{
  ComplexPoly N;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [j, k] = detail::others(i);
    const complex ti = pc.t[i];
    const std::array<complex, 2> rest{pc.t[j], pc.t[k]};
    N = N + c[i] * (ComplexPoly({-ti * (z[i] - real(1)), z[i] - ti}) * ComplexPoly::from_roots(rest));
  }
  return N;
}

struct PsiInverseOptions
{
  /// Relative distance below which the pole-free p formulas are used.
  real alternate_threshold = 1e-4;
  real degenerate_leading = 1e-12;
};

/// Right inverse of psi: q = roots of N (sorted by real, then imaginary part), p from the eigenvalue formula.
inline DarbouxPoint psi_inverse(const PoleConfig& pc, const std::array<complex, 3>& z, const std::array<complex, 3>& c,
                                const PsiInverseOptions& opt = {})
{
  const auto& t = pc.t;
  complex L = 0, S = 0;
  real lscale = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    L += c[i] * (z[i] - t[i]);
    S += c[i] * z[i];
    lscale += std::abs(c[i]) * (std::abs(z[i]) + std::abs(t[i]));
  }
  if (std::abs(L) <= opt.degenerate_leading * lscale || L == complex(0))
    throw Error(ErrorCode::cubic_degenerates, "leading coefficient sum ci (zi - ti) vanishes");

  auto roots = poly_roots(q_polynomial(pc, z, c));
  std::sort(roots.begin(), roots.end(), lex_less);

  DarbouxPoint d;
  for (std::size_t k = 0; k < 3; ++k) d.q[k] = roots[k];

  const real scale = pc.scale();
  const complex prod_1_t = (real(1) - t[0]) * (real(1) - t[1]) * (real(1) - t[2]);
  for (std::size_t k = 0; k < 3; ++k) {
    const complex qk = d.q[k];
    const auto [m1, m2] = detail::others(k);
    complex pk = 0;
    if (std::abs(qk - real(1)) < opt.alternate_threshold * scale) {
      // S / (qk - 1) with N(1) = L prod (1 - qm) = S prod (1 - tj)
      pk += -L * (real(1) - d.q[m1]) * (real(1) - d.q[m2]) / prod_1_t;
    } else {
      pk += S / (qk - real(1));
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const complex ti = t[i];
      if (std::abs(qk - ti) < opt.alternate_threshold * scale) {
        // ci zi / (qk - ti) with N(ti) = L prod (ti - qm) = ci ti (1 - ti) prod_{j != i} (ti - tj)
        const auto [j, jj] = detail::others(i);
        pk -= -z[i] * L * (ti - d.q[m1]) * (ti - d.q[m2]) / (ti * (real(1) - ti) * (ti - t[j]) * (ti - t[jj]));
      } else {
        pk -= c[i] * z[i] / (qk - ti);
      }
    }
    if (!is_finite(pk)) throw Error(ErrorCode::indeterminate_p, "p formula indeterminate at q = " + std::to_string(qk.real()));
    d.p[k] = pk;
  }
  return d;
}

inline DarbouxPoint psi_inverse(const PoleConfig& pc, const ZC& zc, const PsiInverseOptions& opt = {})
{
  return psi_inverse(pc, zc.z, zc.c, opt);
}

/// Sigma point (z; c1, c2, c3) with c1 + c2 + c3 = 0.
struct SigmaPoint
{
  complex z{};
  std::array<complex, 3> c{};

  FuchsianSystem system(const PoleConfig& pc) const { return {pc, {z, z, z}, c}; }
};

/// (p1, p2, q3) on Sigma^Darb = {q1 = 0, q2 = 1, p3 = 0}.
struct SigmaDarbPoint
{
  complex p1{}, p2{}, q3{};

  DarbouxPoint full() const { return {{0, 1, q3}, {p1, p2, 0}}; }
};

/// The cleared bracket t1 t2 t3 (q3 - 1) p1 - (t1 - 1)(t2 - 1)(t3 - 1) q3 p2.
inline complex darb_bracket(const PoleConfig& pc, const SigmaDarbPoint& s)
{
  const auto& t = pc.t;
  return t[0] * t[1] * t[2] * (s.q3 - real(1)) * s.p1 - (t[0] - real(1)) * (t[1] - real(1)) * (t[2] - real(1)) * s.q3 * s.p2;
}

/// Q^Darb = q3 (q3 - 1) * bracket.
inline complex q_darb(const PoleConfig& pc, const SigmaDarbPoint& s) { return s.q3 * (s.q3 - real(1)) * darb_bracket(pc, s); }

inline real q_darb_scale(const PoleConfig& pc, const SigmaDarbPoint& s)
{
  const auto& t = pc.t;
  const real a = std::abs(t[0] * t[1] * t[2] * (s.q3 - real(1)) * s.p1);
  const real b = std::abs((t[0] - real(1)) * (t[1] - real(1)) * (t[2] - real(1)) * s.q3 * s.p2);
  return std::abs(s.q3) * std::abs(s.q3 - real(1)) * (a + b) + std::abs(s.q3) + std::abs(s.q3 - real(1));
}

/// psi restricted to Sigma^Darb.
inline SigmaPoint sigma_darb_to_sigma(const PoleConfig& pc, const SigmaDarbPoint& s)
{
  const auto& t = pc.t;
  const complex Qd = q_darb(pc, s);
  if (std::abs(Qd) <= real(1e-14) * q_darb_scale(pc, s) || Qd == complex(0))
    throw Error(ErrorCode::polar_locus, "Q^Darb = 0");
  const complex D = darb_bracket(pc, s);
  SigmaPoint out;
  // 1 - 1/z = (t1-1)(t2-1)(t3-1)/(t1 t2 t3) * q3/(q3-1) * p2/p1, multiplied through by t1 t2 t3 (q3 - 1) p1
  out.z = t[0] * t[1] * t[2] * (s.q3 - real(1)) * s.p1 / D;
  const complex common = D / (s.q3 * (s.q3 - real(1)));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [j, k] = detail::others(i);
    out.c[i] = common * (s.q3 - t[i]) / ((t[i] - t[j]) * (t[i] - t[k]));
  }
  return out;
}

struct SigmaToDarbOptions
{
  real sigma_tol = 1e-10;
  real special_tol = 1e-13;
};

/// Inverse of sigma_darb_to_sigma: (z Q0/(t1 t2 t3), (z - 1) Q1/prod(ti - 1), -Q0/Qinf).
inline SigmaDarbPoint sigma_to_sigma_darb(const PoleConfig& pc, const SigmaPoint& s, const SigmaToDarbOptions& opt = {})
{
  const auto& t = pc.t;
  const auto& c = s.c;
  const real cs = std::max({real(1), std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
  if (std::abs(c[0] + c[1] + c[2]) > opt.sigma_tol * cs)
    throw Error(ErrorCode::not_in_sigma, "c1 + c2 + c3 != 0");
  const complex Q0 = q_zero(pc, c), Qi = q_infinity(pc, c), Q1 = Q0 + Qi;
  const real tsc = pc.scale();
  const real qscale = cs * tsc * tsc;
  for (complex Q : {Q0, Q1, Qi})
    if (std::abs(Q) <= opt.special_tol * qscale) throw Error(ErrorCode::special_subset, "Q0 Q1 Qinf = 0");
  SigmaDarbPoint out;
  out.p1 = s.z * Q0 / (t[0] * t[1] * t[2]);
  out.p2 = (s.z - real(1)) * Q1 / ((t[0] - real(1)) * (t[1] - real(1)) * (t[2] - real(1)));
  out.q3 = -Q0 / Qi;
  return out;
}

/// Frobenius norm of J^T Omega J - Omega for J = d psi / d(q, p).
inline real symplectic_defect(const PoleConfig& pc, const DarbouxPoint& d, real h = 1e-5)
{
  check_q_distinct(d);
  auto f = [&](const ComplexVector& v) { return psi(pc, DarbouxPoint::from_flat(v)).flat(); };
  const ComplexMatrix J = jacobian_fd(f, d.flat(), h);
  ComplexMatrix Om = ComplexMatrix::Zero(6, 6);
  for (int k = 0; k < 3; ++k) {
    Om(k, k + 3) = 1;
    Om(k + 3, k) = -1;
  }
  return (J.transpose() * Om * J - Om).norm();
}

}
#endif
