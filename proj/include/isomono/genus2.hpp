#ifndef ISOMONO_GENUS2_HPP
#define ISOMONO_GENUS2_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "isomono/darboux.hpp"
#include "isomono/error.hpp"
#include "isomono/fuchsian.hpp"
#include "isomono/numkit/polynomial.hpp"

namespace isomono
{

/// Normal form A = (0 beta; gamma 0) on y^2 = F(x), beta = (b1 x + b0) dx/y, gamma = (g1 x + g0) dx/y.
struct Genus2System
{
  PoleConfig poles;
  complex beta0{}, beta1{}, gamma0{}, gamma1{};

  complex beta_at(complex x) const { return beta1 * x + beta0; }
  complex gamma_at(complex x) const { return gamma1 * x + gamma0; }

  /// b0 g1 - b1 g0; vanishes iff beta and gamma are proportional.
  complex wronskian() const { return beta0 * gamma1 - beta1 * gamma0; }

  real scale() const { return std::max({std::abs(beta0), std::abs(beta1), std::abs(gamma0), std::abs(gamma1)}); }

  bool is_reducible(real tol = 1e-12) const
  {
    const real s = scale();
    return std::abs(wronskian()) <= tol * s * s;
  }
};

/// nu(x) = nu2 x^2 + nu1 x + nu0, the numerator of det A against dx^2 / F.
struct QuadraticDifferential
{
  complex nu0{}, nu1{}, nu2{};

  complex operator()(complex x) const { return (nu2 * x + nu1) * x + nu0; }
  complex discriminant() const { return nu1 * nu1 - real(4) * nu0 * nu2; }
  real scale() const { return std::max({std::abs(nu0), std::abs(nu1), std::abs(nu2)}); }
};

/// F(x) = x (x - 1)(x - t1)(x - t2)(x - t3).
inline ComplexPoly curve_polynomial(const PoleConfig& pc)
{
  const std::array<complex, 5> r{complex(0), complex(1), pc.t[0], pc.t[1], pc.t[2]};
  return ComplexPoly::from_roots(r);
}

inline QuadraticDifferential det_quadratic(const Genus2System& s)
{
  return {-s.beta0 * s.gamma0, -(s.beta1 * s.gamma0 + s.beta0 * s.gamma1), -s.beta1 * s.gamma1};
}

inline bool is_reducible_nu(const QuadraticDifferential& nu, real tol)
{
  const real s = nu.scale();
  return std::abs(nu.discriminant()) < tol * s * s;
}

/// Lift of a Sigma point: b(x) = ((2z - 1) x - z)/2, c(x) = -Qinf x - Q0.
inline Genus2System phi_lift(const PoleConfig& pc, const SigmaPoint& s, real sigma_tol = 1e-10)
{
  const real cs = std::max({real(1), std::abs(s.c[0]), std::abs(s.c[1]), std::abs(s.c[2])});
  if (std::abs(s.c[0] + s.c[1] + s.c[2]) > sigma_tol * cs) throw Error(ErrorCode::not_in_sigma, "c1 + c2 + c3 != 0");
  Genus2System g;
  g.poles = pc;
  g.beta1 = (real(2) * s.z - real(1)) / real(2);
  g.beta0 = -s.z / real(2);
  g.gamma1 = -q_infinity(pc, s.c);
  g.gamma0 = -q_zero(pc, s.c);
  return g;
}

inline Genus2System phi_lift(const FuchsianSystem& f, real sigma_tol = 1e-10)
{
  if (sigma_membership(f, sigma_tol).in_sigma == false) throw Error(ErrorCode::not_in_sigma, "system is not in Sigma");
  return phi_lift(f.poles, SigmaPoint{f.z[0], f.c}, sigma_tol);
}

/// Roots of nu in deterministic (real, imaginary) order.
inline std::array<complex, 2> nu_roots(const QuadraticDifferential& nu)
{
  if (std::abs(nu.nu2) == 0) throw Error(ErrorCode::root_at_infinity, "nu2 = 0");
  auto r = poly_roots(ComplexPoly({nu.nu0, nu.nu1, nu.nu2}));
  std::sort(r.begin(), r.end(), lex_less);
  return {r[0], r[1]};
}

/// Preimage on Sigma of nu with x_beta = root number root_choice (0 or 1) of nu.
inline SigmaPoint section_phi(const PoleConfig& pc, const QuadraticDifferential& nu, int root_choice = 0,
                              real exceptional_tol = 1e-12)
{
  if (root_choice != 0 && root_choice != 1) throw Error(ErrorCode::invalid_argument, "root_choice must be 0 or 1");
  if (std::abs(nu.nu2) <= real(1e-14) * nu.scale() || nu.nu2 == complex(0))
    throw Error(ErrorCode::root_at_infinity, "nu2 = 0 puts a root of nu at infinity");
  const auto roots = nu_roots(nu);
  const complex xb = roots[static_cast<std::size_t>(root_choice)];
  const complex xg = roots[static_cast<std::size_t>(1 - root_choice)];
  if (std::abs(real(2) * xb - real(1)) <= exceptional_tol * std::max(real(1), std::abs(xb)))
    throw Error(ErrorCode::exceptional_decomposition, "x_beta = 1/2");
  const auto& t = pc.t;
  SigmaPoint s;
  s.z = xb / (real(2) * xb - real(1));
  for (std::size_t i = 0; i < 3; ++i) {
    const complex tj = t[(i + 1) % 3], tk = t[(i + 2) % 3];
    s.c[i] = real(2) * nu.nu2 * (t[i] - xg) / ((t[i] - tj) * (t[i] - tk)) * (real(2) * xb - real(1));
  }
  return s;
}

/// A point of X_t over x, with a sign selecting y = sheet * sqrt(F(x)) (principal root), 0 at Weierstrass points.
struct TangencyPoint
{
  complex x{};
  complex y{};
  int sheet = 0;
  bool at_infinity = false;
  int multiplicity = 1;
};

/// Height p of a horizontal section, possibly infinite.
struct Height
{
  complex value{};
  bool infinite = false;

  static Height at(complex p) { return {p, false}; }
  static Height infinity() { return {0, true}; }
};

/// Coefficients (a, b) of the tangency form (a x + b) dx/y at height p.
/// Riccati convention: y = y1/y2 gives dy = gamma y^2 - beta, so the form is gamma p^2 - beta.
inline std::array<complex, 2> tangency_form(const Genus2System& s, const Height& h)
{
  if (h.infinite) return {s.gamma1, s.gamma0};
  const complex p2 = h.value * h.value;
  return {s.gamma1 * p2 - s.beta1, s.gamma0 * p2 - s.beta0};
}

struct TangencyOptions
{
  /// Relative threshold for "coefficient vanishes" and for "x* is a Weierstrass value".
  real tol = 1e-10;
};

inline std::vector<TangencyPoint> tangency_points(const Genus2System& s, const Height& h, const TangencyOptions& opt = {})
{
  const auto [a, b] = tangency_form(s, h);
  const real sc = std::max(std::abs(a), std::abs(b));
  const real ref = std::max(sc, s.scale() * (h.infinite ? real(1) : std::max(real(1), std::norm(h.value))));
  if (sc <= opt.tol * ref || sc == 0)
    throw Error(ErrorCode::invariant_horizontal, "tangency form vanishes identically: there is an invariant horizontal");
  if (std::abs(a) <= opt.tol * ref) return {TangencyPoint{0, 0, 0, true, 2}};
  const complex xs = -b / a;
  const auto w = s.poles.finite_poles();
  for (const complex& wv : w)
    if (std::abs(xs - wv) <= opt.tol * std::max(real(1), std::abs(wv))) return {TangencyPoint{wv, 0, 0, false, 2}};
  const complex y = std::sqrt(curve_polynomial(s.poles)(xs));
  return {TangencyPoint{xs, y, 1, false, 1}, TangencyPoint{xs, -y, -1, false, 1}};
}

inline int total_multiplicity(const std::vector<TangencyPoint>& pts)
{
  int m = 0;
  for (const auto& p : pts) m += p.multiplicity;
  return m;
}

struct SpecialFiber
{
  /// Weierstrass value where the tangency point sits.
  PoleLabel w = PoleLabel::zero;
  Height p;
  int multiplicity = 1;
};

/// Heights p whose tangency divisor is a double point at a Weierstrass point.
inline std::vector<SpecialFiber> twelve_special_fibers(const Genus2System& s, real tol = 1e-10)
{
  if (s.is_reducible(tol)) throw Error(ErrorCode::degree_collapse, "reducible system: the degree-2 map degenerates");
  std::vector<SpecialFiber> out;
  auto solve = [&](PoleLabel w, complex lead, complex rhs) {
    // lead * p^2 = rhs
    const real ref = std::max({std::abs(lead), std::abs(rhs), real(1e-300)});
    if (std::abs(lead) <= tol * ref) {
      out.push_back({w, Height::infinity(), 2});
      return;
    }
    if (std::abs(rhs) <= tol * ref) {
      out.push_back({w, Height::at(0), 2});
      return;
    }
    const complex r = std::sqrt(rhs / lead);
    out.push_back({w, Height::at(r), 1});
    out.push_back({w, Height::at(-r), 1});
  };
  for (std::size_t k = 0; k < 5; ++k) {
    const complex wv = s.poles.finite_poles()[k];
    solve(all_pole_labels[k], s.gamma_at(wv), s.beta_at(wv));
  }
  solve(PoleLabel::infinity, s.gamma1, s.beta1);
  return out;
}

inline int total_multiplicity(const std::vector<SpecialFiber>& f)
{
  int m = 0;
  for (const auto& x : f) m += x.multiplicity;
  return m;
}

struct SelfIntersection
{
  int c1_L = 4;
  /// Sum of (e_p - 1) over the special fibers.
  int branch_count = 0;
  /// c1(wedge^2 E) = c1(L) - B/2.
  int c1_wedge = 0;
  int value = 0;
  bool non_generic = false;
};

/// d2 = (c1(L) - B/2) - 2 from the branch structure of the special fibers.
inline SelfIntersection self_intersection(const Genus2System& s, real tol = 1e-10)
{
  const auto fibers = twelve_special_fibers(s, tol);
  SelfIntersection r;
  r.branch_count = total_multiplicity(fibers);
  for (const auto& f : fibers) {
    if (f.multiplicity > 1) r.non_generic = true;
  }
  for (std::size_t i = 0; i < fibers.size() && !r.non_generic; ++i)
    for (std::size_t j = i + 1; j < fibers.size(); ++j) {
      const auto& a = fibers[i].p;
      const auto& b = fibers[j].p;
      if (a.infinite != b.infinite) continue;
      const real ref = std::max({real(1), std::abs(a.value), std::abs(b.value)});
      if (a.infinite || std::abs(a.value - b.value) <= real(1e-8) * ref) r.non_generic = true;
    }
  r.c1_wedge = r.c1_L - r.branch_count / 2;
  r.value = r.c1_wedge - 2;
  return r;
}

}
#endif
