#ifndef ISOMONO_MONODROMY_HPP
#define ISOMONO_MONODROMY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isomono/darboux.hpp"
#include "isomono/error.hpp"
#include "isomono/fuchsian.hpp"
#include "isomono/genus2.hpp"
#include "isomono/numkit/linalg.hpp"
#include "isomono/numkit/transport.hpp"

namespace isomono
{

/// Winding number of a closed polyline around p (exact for straight segments).
inline real winding_number(const Polyline& path, complex p)
{
  real total = 0;
  const auto& pts = path.points();
  for (std::size_t k = 1; k < pts.size(); ++k) total += std::arg((pts[k] - p) / (pts[k - 1] - p));
  return total / (2 * pi);
}

/// k-th basepoint tried by default_basepoint: on the circle of radius 2(1 + max|ti|), starting at the
/// positive imaginary axis and alternating sides in steps of 7.5 degrees.
inline complex basepoint_candidate(const PoleConfig& pc, int k)
{
  const real m = std::max({std::abs(pc.t[0]), std::abs(pc.t[1]), std::abs(pc.t[2])});
  const int side = (k % 2 == 0) ? 1 : -1;
  const real angle = pi / 2 + side * ((k + 1) / 2) * (pi / 24);
  return std::polar(2 * (real(1) + m), angle);
}

struct Loop
{
  complex basepoint{};
  Polyline path;
  PoleLabel label = PoleLabel::zero;
};

/// Six based loops in label order, plus the order in which the finite ones compose to the identity.
struct LoopSystem
{
  complex basepoint{};
  std::array<Loop, 6> loops;
  /// Finite labels sorted by increasing arg((pole - b) / (-b)).
  std::array<PoleLabel, 5> order{};
  real radius = 0;

  const Loop& operator[](PoleLabel p) const { return loops[index_of(p)]; }
};

struct LoopOptions
{
  std::size_t circle_points = 64;
  std::size_t infinity_points = 128;
  real radius_factor = real(0.3);
  /// Clearance of every path from foreign poles, as a fraction of the minimum pole distance.
  real clearance_factor = real(0.1);
};

/// Lasso around `pole`: segment from b to the circle, the circle counterclockwise, and back.
inline Polyline lasso(complex b, complex pole, real r, std::size_t n = 64)
{
  const complex u = (b - pole) / std::abs(b - pole);
  std::vector<complex> pts{b};
  for (std::size_t k = 0; k <= n; ++k) pts.push_back(pole + r * u * std::exp(complex(0, 2 * pi * real(k) / real(n))));
  pts.push_back(b);
  return Polyline(std::move(pts));
}

inline LoopSystem standard_loops(const PoleConfig& pc, complex b, const LoopOptions& opt = {})
{
  pc.validate();
  const auto poles = pc.finite_poles();
  const std::vector<complex> pv(poles.begin(), poles.end());
  const real dmin = min_pairwise_distance(pv);
  const real r = opt.radius_factor * dmin;
  const real clearance = opt.clearance_factor * dmin;
  for (const complex& p : poles)
    if (std::abs(b - p) <= r) throw Error(ErrorCode::invalid_argument, "basepoint coincides with or is too close to a pole");

  LoopSystem ls;
  ls.basepoint = b;
  ls.radius = r;
  for (std::size_t k = 0; k < 5; ++k) {
    ls.loops[k] = {b, lasso(b, poles[k], r, opt.circle_points), all_pole_labels[k]};
    // the segments must keep clear of every other pole
    const Polyline seg({b, poles[k] + r * (b - poles[k]) / std::abs(b - poles[k])});
    for (std::size_t j = 0; j < 5; ++j)
      if (j != k && seg.distance_to(poles[j]) < clearance)
        throw Error(ErrorCode::path_planning_failure, std::string("segment to ") + to_string(all_pole_labels[k]) +
                                                          " passes near " + to_string(all_pole_labels[j]) + "; move the basepoint");
  }
  std::vector<complex> big;
  for (std::size_t k = 0; k <= opt.infinity_points; ++k)
    big.push_back(b * std::exp(complex(0, -2 * pi * real(k) / real(opt.infinity_points))));
  big.back() = b;
  ls.loops[5] = {b, Polyline(std::move(big)), PoleLabel::infinity};
  for (const complex& p : poles)
    if (ls.loops[5].path.distance_to(p) < clearance)
      throw Error(ErrorCode::path_planning_failure, "circle around infinity passes near a finite pole");

  // winding self-test
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t j = 0; j < 5; ++j) {
      const real expected = k == 5 ? real(-1) : (k == j ? real(1) : real(0));
      if (std::abs(winding_number(ls.loops[k].path, poles[j]) - expected) > 1e-6)
        throw Error(ErrorCode::path_planning_failure, std::string("loop ") + to_string(all_pole_labels[k]) + " has wrong winding");
    }

  std::array<std::size_t, 5> idx{0, 1, 2, 3, 4};
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t i, std::size_t j) { return std::arg((poles[i] - b) / (-b)) < std::arg((poles[j] - b) / (-b)); });
  for (std::size_t k = 0; k < 5; ++k) ls.order[k] = all_pole_labels[idx[k]];
  return ls;
}

/// Smallest distance from a lasso segment or the circle around infinity to a foreign pole, over the minimum pole distance.
inline real loop_clearance(const PoleConfig& pc, complex b, const LoopOptions& opt = {})
{
  const auto poles = pc.finite_poles();
  const real dmin = min_pairwise_distance(std::vector<complex>(poles.begin(), poles.end()));
  const real r = opt.radius_factor * dmin;
  real worst = std::abs(std::abs(b) - std::abs(poles[0]));
  for (std::size_t k = 0; k < 5; ++k) {
    worst = std::min(worst, std::abs(std::abs(b) - std::abs(poles[k])));
    const Polyline seg({b, poles[k] + r * (b - poles[k]) / std::abs(b - poles[k])});
    for (std::size_t j = 0; j < 5; ++j)
      if (j != k) worst = std::min(worst, seg.distance_to(poles[j]));
  }
  return worst / dmin;
}

/// Candidate basepoint with the largest loop_clearance among those standard_loops accepts.
inline complex default_basepoint(const PoleConfig& pc)
{
  std::optional<complex> best;
  real best_clearance = -1;
  for (int k = 0; k < 48; ++k) {
    const complex b = basepoint_candidate(pc, k);
    try {
      standard_loops(pc, b);
    } catch (const Error&) {
      continue;
    }
    const real c = loop_clearance(pc, b);
    if (c > best_clearance) {
      best_clearance = c;
      best = b;
    }
  }
  if (!best) throw Error(ErrorCode::path_planning_failure, "no admissible basepoint on the candidate circle");
  return *best;
}

inline LoopSystem standard_loops(const PoleConfig& pc) { return standard_loops(pc, default_basepoint(pc)); }

using MatrixSet = std::array<Matrix2, 6>;

struct MonodromyDiagnostics
{
  real max_abs_trace = 0;
  real max_det_defect = 0;
  /// Max entry of (ordered product - I).
  real product_defect = 0;
  /// Sum over factors of |prefix| |Mj| |suffix| in the ordered product; multiplies per-matrix relative errors.
  real product_sensitivity = 0;
  IntegrationStats stats;
};

/// Mj = (transport along loop j)^{-1}; in loop order M(1) ... M(5) M_inf = I.
struct MonodromyRep
{
  MatrixSet M;
  LoopSystem loops;
  real tol = 0;
  MonodromyDiagnostics diagnostics;

  const Matrix2& operator[](PoleLabel p) const { return M[index_of(p)]; }

  bool satisfies_invariants(real trace_tol = 1e-6, real det_tol = 1e-8, real product_tol = 1e-6) const
  {
    return diagnostics.max_abs_trace < trace_tol && diagnostics.max_det_defect < det_tol &&
           diagnostics.product_defect < product_tol;
  }
};

inline Matrix2 ordered_product(const MatrixSet& M, const LoopSystem& ls)
{
  Matrix2 P = Matrix2::identity();
  for (PoleLabel p : ls.order) P = P * M[index_of(p)];
  return P * M[5];
}

inline real product_sensitivity(const MatrixSet& M, const LoopSystem& ls)
{
  std::vector<Matrix2> seq;
  for (PoleLabel p : ls.order) seq.push_back(M[index_of(p)]);
  seq.push_back(M[5]);
  real k = 0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    Matrix2 pre = Matrix2::identity(), post = Matrix2::identity();
    for (std::size_t i = 0; i < j; ++i) pre = pre * seq[i];
    for (std::size_t i = j + 1; i < seq.size(); ++i) post = post * seq[i];
    k += pre.max_abs() * seq[j].max_abs() * post.max_abs();
  }
  return k;
}

inline MonodromyRep fuchsian_monodromy(const FuchsianSystem& sys, const LoopSystem& loops, real tol = 1e-10)
{
  MonodromyRep rep;
  rep.loops = loops;
  rep.tol = tol;
  TransportOptions topt;
  topt.tol = tol;
  const auto poles = sys.poles.finite_poles();
  topt.singular_points.assign(poles.begin(), poles.end());
  auto coeff = [&](complex x) { return connection_coefficient(sys, x); };
  for (std::size_t k = 0; k < 6; ++k) {
    const auto r = transport_detailed(coeff, loops.loops[k].path, topt);
    rep.M[k] = r.B.inverse();
    rep.diagnostics.stats.accepted += r.stats.accepted;
    rep.diagnostics.stats.rejected += r.stats.rejected;
    rep.diagnostics.stats.rhs_evaluations += r.stats.rhs_evaluations;
  }
  for (const auto& M : rep.M) {
    rep.diagnostics.max_abs_trace = std::max(rep.diagnostics.max_abs_trace, std::abs(M.trace()));
    rep.diagnostics.max_det_defect = std::max(rep.diagnostics.max_det_defect, std::abs(M.det() + real(1)));
  }
  rep.diagnostics.product_defect = max_abs_diff(ordered_product(rep.M, loops), Matrix2::identity());
  rep.diagnostics.product_sensitivity = product_sensitivity(rep.M, loops);
  return rep;
}

struct BasepointSearch
{
  /// Tolerance of the trial monodromy computations.
  real coarse_tol = 1e-6;
  /// Ring radii as multiples of max(1, |ti|) + 0.5.
  std::vector<real> ring_factors{1.2, 1.5, 2, 3};
  int angles = 24;
};

/// Basepoint minimizing product_sensitivity over a grid of rings and angles, judged from coarse trial
/// monodromies; falls back to default_basepoint when no trial succeeds.
inline complex conditioned_basepoint(const FuchsianSystem& sys, const BasepointSearch& opt = {})
{
  const real m = std::max({real(1), std::abs(sys.poles.t[0]), std::abs(sys.poles.t[1]), std::abs(sys.poles.t[2])});
  std::optional<complex> best;
  real best_k = std::numeric_limits<real>::infinity();
  for (real f : opt.ring_factors)
    for (int k = 0; k < opt.angles; ++k) {
      const int side = (k % 2 == 0) ? 1 : -1;
      const complex b = std::polar(f * (m + real(0.5)), pi / 2 + side * ((k + 1) / 2) * (2 * pi / opt.angles));
      try {
        const auto ls = standard_loops(sys.poles, b);
        const real kappa = fuchsian_monodromy(sys, ls, opt.coarse_tol).diagnostics.product_sensitivity;
        if (kappa < best_k) {
          best_k = kappa;
          best = b;
        }
      } catch (const Error&) {
      }
    }
  return best ? *best : default_basepoint(sys.poles);
}

/// Monodromy at conditioned_basepoint(sys).
inline MonodromyRep fuchsian_monodromy(const FuchsianSystem& sys, real tol = 1e-10)
{
  return fuchsian_monodromy(sys, standard_loops(sys.poles, conditioned_basepoint(sys)), tol);
}

/// Index words into (M0, M1, Mt1, Mt2, Mt3, Minf), 0-based.
using Word = std::vector<int>;

inline std::vector<Word> default_words() { return {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {0, 1, 2, 3}}; }

inline Matrix2 word_product(const MatrixSet& M, const Word& w)
{
  Matrix2 P = Matrix2::identity();
  for (int i : w) {
    if (i < 0 || i > 5) throw Error(ErrorCode::invalid_argument, "word index out of range");
    P = P * M[static_cast<std::size_t>(i)];
  }
  return P;
}

inline std::vector<complex> even_word_traces(const MatrixSet& M, const std::vector<Word>& words)
{
  std::vector<complex> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    if (w.size() % 2 != 0) throw Error(ErrorCode::odd_word, "word of odd length " + std::to_string(w.size()));
    out.push_back(word_product(M, w).trace());
  }
  return out;
}

inline std::vector<complex> even_word_traces(const MonodromyRep& rep, const std::vector<Word>& words)
{
  return even_word_traces(rep.M, words);
}

/// sin of the angle between the lines [u] and [w].
inline real fubini_study(const std::array<complex, 2>& u, const std::array<complex, 2>& w)
{
  const real nu = std::sqrt(std::norm(u[0]) + std::norm(u[1])), nw = std::sqrt(std::norm(w[0]) + std::norm(w[1]));
  if (nu == 0 || nw == 0) return 0;
  return std::abs(u[0] * w[1] - u[1] * w[0]) / (nu * nw);
}

/// Eigenvectors of a 2x2 matrix (the same line twice when it is not diagonalizable).
inline std::array<std::array<complex, 2>, 2> eigenvectors(const Matrix2& M)
{
  const complex h = M.trace() / real(2);
  const complex s = std::sqrt(h * h - M.det());
  std::array<std::array<complex, 2>, 2> out;
  const std::array<complex, 2> lam{h + s, h - s};
  for (std::size_t k = 0; k < 2; ++k) {
    const std::array<complex, 2> v1{M.b, lam[k] - M.a}, v2{lam[k] - M.d, M.c};
    out[k] = std::norm(v1[0]) + std::norm(v1[1]) >= std::norm(v2[0]) + std::norm(v2[1]) ? v1 : v2;
  }
  return out;
}

struct IrreducibilityResult
{
  bool irreducible = true;
  /// Smallest over candidate lines of the largest Fubini-Study motion by any generator.
  real min_motion = 0;
  /// Largest |tr [Mj, Mk] - 2|; reported only.
  real commutator_defect = 0;
};

template <std::size_t N>
IrreducibilityResult irreducibility_test(const std::array<Matrix2, N>& M, real tol = 1e-6)
{
  IrreducibilityResult res;
  std::optional<std::size_t> first;
  for (std::size_t j = 0; j < N; ++j) {
    const real s = std::max(real(1), M[j].max_abs());
    const bool plus = max_abs_diff(M[j], Matrix2::identity() * M[j].a) <= tol * s && std::abs(M[j].a - M[j].d) <= tol * s;
    if (!plus) {
      first = j;
      break;
    }
  }
  if (!first) throw Error(ErrorCode::central_representation, "all matrices are scalar");
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t k = j + 1; k < N; ++k) {
      const Matrix2 C = M[j] * M[k] * M[j].inverse() * M[k].inverse();
      res.commutator_defect = std::max(res.commutator_defect, std::abs(C.trace() - real(2)));
    }
  res.min_motion = std::numeric_limits<real>::infinity();
  for (const auto& v : eigenvectors(M[*first])) {
    real motion = 0;
    for (const auto& Mk : M) motion = std::max(motion, fubini_study(v, Mk.apply(v)));
    res.min_motion = std::min(res.min_motion, motion);
  }
  res.irreducible = res.min_motion > tol;
  return res;
}

/// Generators M0 Mk of the even-word subgroup, the representation of the genus-2 curve.
inline std::array<Matrix2, 5> even_generators(const MatrixSet& M)
{
  std::array<Matrix2, 5> out;
  for (std::size_t k = 0; k < 5; ++k) out[k] = M[0] * M[k + 1];
  return out;
}

/// Irreducibility of the even-word subgroup. The full group is always irreducible on Sigma:
/// odd loops swap the sheets and hence the two invariant lines of a reducible lift.
inline IrreducibilityResult irreducibility_test(const MonodromyRep& rep, real tol = 1e-6)
{
  return irreducibility_test(even_generators(rep.M), tol);
}

inline bool is_irreducible(const MonodromyRep& rep, real tol = 1e-6) { return irreducibility_test(rep, tol).irreducible; }

struct HyperellipticOptions
{
  real tol = 1e-10;
  /// Minimum distance to a branch point; negative selects 0.1 * (minimum distance between branch points).
  real safety_distance = -1;
  /// Bound on |F(x(s + h)) / F(x(s)) - 1| per step, keeping the two roots of F apart.
  real root_step = real(0.4);
};

struct HyperellipticResult
{
  Matrix2 B;
  int sheet = 1;
  complex y_end{};
  IntegrationStats stats;
};

/// Transport of dY + A Y = 0, A = (0, beta(x)/y; gamma(x)/y, 0), with y continued from y0 = sheet0 * sqrt(F(x0)).
inline HyperellipticResult hyperelliptic_continuation(const Genus2System& g, const Polyline& path, int sheet0,
                                                      const HyperellipticOptions& opt = {})
{
  if (sheet0 != 1 && sheet0 != -1) throw Error(ErrorCode::invalid_argument, "sheet must be +1 or -1");
  const auto w = g.poles.finite_poles();
  const std::vector<complex> wv(w.begin(), w.end());
  const real safety = opt.safety_distance >= 0 ? opt.safety_distance : real(0.1) * min_pairwise_distance(wv);
  for (const complex& p : wv)
    if (path.distance_to(p) < safety) throw Error(ErrorCode::branch_approach, "path too close to a branch point");

  const ComplexPoly F = curve_polynomial(g.poles), dF = F.derivative();
  complex y = real(sheet0) * std::sqrt(F(path.front()));
  auto nearest = [&](complex x) {
    const complex r = std::sqrt(F(x));
    return std::abs(r - y) <= std::abs(r + y) ? r : -r;
  };

  CVec<4> state{complex(1), complex(0), complex(0), complex(1)};
  HyperellipticResult res;
  StepControl ctl;
  ctl.rtol = opt.tol;
  const auto& pts = path.points();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const complex a = pts[k - 1], dx = pts[k] - a;
    if (dx == complex(0)) continue;
    auto rhs = [&](real s, const CVec<4>& v) {
      const complex x = a + s * dx;
      const complex yy = nearest(x);
      const Matrix2 A{0, g.beta_at(x) / yy, g.gamma_at(x) / yy, 0};
      const Matrix2 D = -(A * Matrix2{v[0], v[1], v[2], v[3]}) * dx;
      return CVec<4>{D.a, D.b, D.c, D.d};
    };
    auto cap = [&](real s, const CVec<4>&) {
      const complex x = a + s * dx;
      return opt.root_step * std::abs(F(x)) / (std::abs(dF(x)) * std::abs(dx) + real(1e-300));
    };
    auto observer = [&](real s, const CVec<4>&) { y = nearest(a + s * dx); };
    auto r = integrate_dopri<4>(rhs, state, real(0), real(1), ctl, cap, observer);
    state = r.state;
    y = nearest(pts[k]);
    res.stats.accepted += r.stats.accepted;
    res.stats.rejected += r.stats.rejected;
    res.stats.rhs_evaluations += r.stats.rhs_evaluations;
  }
  res.B = Matrix2{state[0], state[1], state[2], state[3]};
  res.y_end = y;
  const complex principal = std::sqrt(F(path.back()));
  res.sheet = std::abs(y - principal) <= std::abs(y + principal) ? 1 : -1;
  return res;
}

struct RhOptions
{
  int root_choice = 0;
  real tol = 1e-10;
  /// Fixed basepoint; defaults to default_basepoint(t).
  std::optional<complex> basepoint;
  /// Relative threshold on nu1^2 - 4 nu0 nu2 below which nu counts as reducible.
  real reducible_tol = 1e-12;
};

/// (t1, t2, t3, nu0, nu1, nu2)
using RhParams = std::array<complex, 6>;

inline RhParams rh_params(const PoleConfig& pc, const QuadraticDifferential& nu)
{
  return {pc.t[0], pc.t[1], pc.t[2], nu.nu0, nu.nu1, nu.nu2};
}

inline FuchsianSystem rh_system(const PoleConfig& pc, const QuadraticDifferential& nu, const RhOptions& opt = {})
{
  if (is_reducible_nu(nu, opt.reducible_tol)) throw Error(ErrorCode::reducible_determinant, "nu1^2 - 4 nu0 nu2 vanishes");
  return section_phi(pc, nu, opt.root_choice).system(pc);
}

inline std::vector<complex> rh_trace_map(const PoleConfig& pc, const QuadraticDifferential& nu, const std::vector<Word>& words,
                                         const RhOptions& opt = {})
{
  const FuchsianSystem sys = rh_system(pc, nu, opt);
  const LoopSystem loops = standard_loops(pc, opt.basepoint.value_or(default_basepoint(pc)));
  return even_word_traces(fuchsian_monodromy(sys, loops, opt.tol), words);
}

struct RhJacobian
{
  ComplexMatrix jacobian;
  RankResult rank;
  real step = 0;
};

struct RhJacobianOptions
{
  RhOptions rh;
  real h_rel = 1e-4;
  real rank_threshold = 1e-6;
  /// Stencil points with separation(t) below this are forbidden.
  real t_guard = 1e-3;
};

inline RhJacobian rh_jacobian_rank(const PoleConfig& pc, const QuadraticDifferential& nu, const std::vector<Word>& words,
                                   const RhJacobianOptions& opt = {})
{
  if (words.size() < 7) throw Error(ErrorCode::invalid_argument, "at least 7 trace words are needed");
  if (is_reducible_nu(nu, opt.rh.reducible_tol)) throw Error(ErrorCode::reducible_determinant, "nu1^2 - 4 nu0 nu2 vanishes");
  RhOptions rh = opt.rh;
  if (!rh.basepoint) rh.basepoint = default_basepoint(pc);
  const RhParams x0 = rh_params(pc, nu);
  real scale = 1;
  for (const complex& v : x0) scale = std::max(scale, std::abs(v));
  RhJacobian out;
  out.step = opt.h_rel * scale;
  const ComplexVector v0(x0.begin(), x0.end());
  auto unpack = [](const ComplexVector& v) {
    return std::pair<PoleConfig, QuadraticDifferential>{PoleConfig(v[0], v[1], v[2]), QuadraticDifferential{v[3], v[4], v[5]}};
  };
  auto forbidden = [&](const ComplexVector& v) {
    const auto [p, n] = unpack(v);
    return !p.valid(opt.t_guard) || is_reducible_nu(n, opt.rh.reducible_tol);
  };
  auto f = [&](const ComplexVector& v) {
    const auto [p, n] = unpack(v);
    return rh_trace_map(p, n, words, rh);
  };
  out.jacobian = jacobian_fd(f, v0, out.step, forbidden);
  out.rank = rank_svd(out.jacobian, opt.rank_threshold);
  return out;
}

}
#endif
