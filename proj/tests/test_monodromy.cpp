#include <gtest/gtest.h>

#include "isomono/garnier.hpp"
#include "isomono/monodromy.hpp"
#include "test_support.hpp"

using namespace isomono;
using isomono::testing::rand_c;
using isomono::testing::random_poles;

namespace
{

FuchsianSystem small_system(Rng& rng, const PoleConfig& pc, real s = 0.5)
{
  FuchsianSystem sys;
  sys.poles = pc;
  for (int i = 0; i < 3; ++i) {
    sys.z[i] = rand_c(rng, s);
    sys.c[i] = rand_c(rng, s);
  }
  return sys;
}

SigmaPoint small_sigma(Rng& rng, real s = 0.5)
{
  SigmaPoint p{rand_c(rng, s), {rand_c(rng, s), rand_c(rng, s), 0}};
  p.c[2] = -p.c[0] - p.c[1];
  return p;
}

real max_diff(const std::vector<complex>& a, const std::vector<complex>& b)
{
  real m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

const PoleConfig base_t(2, 3, 5);

}

TEST(Loops, WindingNumbers)
{
  const auto ls = standard_loops(base_t);
  const auto poles = base_t.finite_poles();
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_TRUE(ls.loops[k].path.closed());
    EXPECT_EQ(ls.loops[k].label, all_pole_labels[k]);
    for (std::size_t j = 0; j < 5; ++j) {
      // independent check: trapezoid integration of dx/(x - p) on a refined path
      const auto& pts = ls.loops[k].path.points();
      complex acc = 0;
      for (std::size_t m = 1; m < pts.size(); ++m) {
        const int sub = 200;
        for (int s = 0; s < sub; ++s) {
          const complex x0 = pts[m - 1] + (pts[m] - pts[m - 1]) * (real(s) / sub);
          const complex x1 = pts[m - 1] + (pts[m] - pts[m - 1]) * (real(s + 1) / sub);
          acc += std::log((x1 - poles[j]) / (x0 - poles[j]));
        }
      }
      const real wn = std::imag(acc) / (2 * pi);
      const real expected = k == 5 ? -1 : (k == j ? 1 : 0);
      EXPECT_NEAR(wn, expected, 1e-6);
      EXPECT_NEAR(winding_number(ls.loops[k].path, poles[j]), expected, 1e-9);
    }
  }
}

TEST(Loops, BasepointAtPoleAndBlockedCorridor)
{
  EXPECT_THROW(standard_loops(base_t, complex(3, 0)), Error);
  // basepoint on the real axis to the left: the segment to 5 passes through 0, 1, 2, 3
  try {
    standard_loops(base_t, complex(-20, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::path_planning_failure);
  }
}

TEST(Loops, OrderByArgument)
{
  const auto ls = standard_loops(base_t);
  // basepoint straight above: poles ordered left to right from the viewpoint of -b
  const complex b = ls.basepoint;
  for (std::size_t k = 1; k < 5; ++k)
    EXPECT_LT(std::arg((position(base_t, ls.order[k - 1]) - b) / (-b)), std::arg((position(base_t, ls.order[k]) - b) / (-b)));
}

TEST(Monodromy, LocalInvariantsAndRelation)
{
  Rng rng(50);
  for (int n = 0; n < 6; ++n) {
    const PoleConfig pc = n == 0 ? base_t : random_poles(rng);
    const FuchsianSystem sys = small_system(rng, pc);
    const auto rep = fuchsian_monodromy(sys);
    for (const auto& M : rep.M) {
      EXPECT_LT(std::abs(M.trace()), 1e-6);
      EXPECT_LT(std::abs(M.det() + 1.0), 1e-8);
      // tr(Mj^2) = tr^2 - 2 det = 2
      EXPECT_LT(std::abs((M * M).trace() - 2.0), 1e-6);
      EXPECT_LT(max_abs_diff(M * M, Matrix2::identity()), 1e-6 * std::max(1.0, M.max_abs() * M.max_abs()));
    }
    EXPECT_LT(rep.diagnostics.product_defect, 1e-6);
    EXPECT_TRUE(rep.satisfies_invariants());
  }
}

TEST(Monodromy, SwappedOrderDoesNotCloseUp)
{
  Rng rng(51);
  const auto rep = fuchsian_monodromy(small_system(rng, base_t));
  LoopSystem sw = rep.loops;
  std::swap(sw.order[0], sw.order[1]);
  EXPECT_GT(max_abs_diff(ordered_product(rep.M, sw), Matrix2::identity()), 1e-3);
}

TEST(EvenWords, DefaultSetAndDeterminants)
{
  Rng rng(52);
  const auto rep = fuchsian_monodromy(small_system(rng, base_t));
  const auto words = default_words();
  ASSERT_EQ(words.size(), 7u);
  const auto tr = even_word_traces(rep, words);
  EXPECT_EQ(tr.size(), 7u);
  for (const auto& w : words) {
    const Matrix2 P = word_product(rep.M, w);
    EXPECT_LT(std::abs(P.det() - 1.0), 1e-8 * std::max(1.0, P.max_abs() * P.max_abs()));
  }
  for (int j = 0; j < 6; ++j) EXPECT_LT(std::abs(even_word_traces(rep, {{j, j}})[0] - 2.0), 1e-6);
  try {
    even_word_traces(rep, {{0, 1, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::odd_word);
  }
}

TEST(EvenWords, ConjugationInvariance)
{
  Rng rng(53);
  const auto rep = fuchsian_monodromy(small_system(rng, base_t));
  const Matrix2 P{rand_c(rng) + 1.0, rand_c(rng), rand_c(rng), rand_c(rng) + 1.0};
  MatrixSet C;
  for (std::size_t k = 0; k < 6; ++k) C[k] = P * rep.M[k] * P.inverse();
  const auto a = even_word_traces(rep.M, default_words()), b = even_word_traces(C, default_words());
  real s = 1;
  for (const auto& v : a) s = std::max(s, std::abs(v));
  EXPECT_LT(max_diff(a, b), 1e-8 * s);
}

TEST(Irreducibility, DiagonalAndCentral)
{
  std::array<Matrix2, 2> diag{Matrix2::diagonal(1, -1), Matrix2::diagonal(complex(0, 1), complex(0, -1))};
  EXPECT_FALSE(irreducibility_test(diag).irreducible);
  std::array<Matrix2, 2> gen{Matrix2{1, 1, 0, 1}, Matrix2{1, 0, 1, 1}};
  EXPECT_TRUE(irreducibility_test(gen).irreducible);
  std::array<Matrix2, 2> central{Matrix2::identity(), Matrix2::identity() * -1.0};
  try {
    irreducibility_test(central);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::central_representation);
  }
}

TEST(Irreducibility, SigmaPoints)
{
  Rng rng(54);
  for (int n = 0; n < 3; ++n) {
    SigmaPoint s = small_sigma(rng);
    const auto gen = fuchsian_monodromy(s.system(base_t));
    EXPECT_TRUE(is_irreducible(gen));
    const complex Q0 = q_zero(base_t, s.c), Qi = q_infinity(base_t, s.c);
    s.z = Q0 / (Qi + 2.0 * Q0);
    const auto sys = s.system(base_t);
    ASSERT_LT(std::abs(sigma_membership(sys, 1e-10).reducible_residual), 1e-12);
    const auto red = fuchsian_monodromy(sys);
    EXPECT_FALSE(is_irreducible(red)) << irreducibility_test(red).min_motion;
    // the odd loops exchange the two invariant lines
    EXPECT_TRUE(irreducibility_test(red.M).irreducible);
  }
}

TEST(Hyperelliptic, LoopWithoutBranchPoints)
{
  Rng rng(55);
  const SigmaPoint s = small_sigma(rng);
  const Genus2System g = phi_lift(base_t, s);
  std::vector<complex> pts;
  for (int k = 0; k <= 32; ++k) pts.push_back(complex(4, 2) + 0.3 * std::exp(complex(0, 2 * pi * k / 32)));
  const auto r = hyperelliptic_continuation(g, Polyline(pts), 1);
  EXPECT_EQ(r.sheet, 1);
  EXPECT_LT(max_abs_diff(r.B, Matrix2::identity()), 1e-6);
  EXPECT_EQ(hyperelliptic_continuation(g, Polyline(pts), -1).sheet, -1);
}

TEST(Hyperelliptic, SingleBranchPointSwapsSheet)
{
  Rng rng(56);
  const Genus2System g = phi_lift(base_t, small_sigma(rng));
  const auto ls = standard_loops(base_t);
  const auto r = hyperelliptic_continuation(g, ls[PoleLabel::t2].path, 1);
  EXPECT_EQ(r.sheet, -1);
}

TEST(Hyperelliptic, EvenLoopsMatchFuchsianTraces)
{
  Rng rng(57);
  for (int n = 0; n < 3; ++n) {
    const PoleConfig pc = n == 0 ? base_t : random_poles(rng);
    const SigmaPoint s = small_sigma(rng);
    const auto rep = fuchsian_monodromy(s.system(pc));
    const Genus2System g = phi_lift(pc, s);
    for (const auto& w : std::vector<Word>{{0, 1}, {2, 4}, {1, 3}}) {
      const Polyline path = rep.loops.loops[w[0]].path.then(rep.loops.loops[w[1]].path);
      const auto r = hyperelliptic_continuation(g, path, 1);
      EXPECT_EQ(r.sheet, 1);
      EXPECT_LT(std::abs(r.B.det() - 1.0), 1e-6);
      const complex fuchs = word_product(rep.M, w).trace();
      EXPECT_LT(std::abs(r.B.trace() - fuchs), 1e-6 * std::max(1.0, std::abs(fuchs)));
    }
  }
}

TEST(Hyperelliptic, BranchApproach)
{
  const Genus2System g = phi_lift(base_t, SigmaPoint{0.2, {0.1, 0.2, -0.3}});
  try {
    hyperelliptic_continuation(g, Polyline({complex(2.5, 0.5), complex(3.0, 0.01), complex(3.5, 0.5)}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::branch_approach);
  }
}

TEST(Isomonodromy, TracesConstantAlongGarnierFlow)
{
  const PoleConfig pc(complex(2, 0.3), complex(3, -0.2), complex(5, 0.4));
  const DarbouxPoint d0{{complex(0.5, 0.4), complex(1.8, -0.3), complex(3.6, 0.5)}, {complex(0.1, 0.05), complex(-0.08, 0.1), complex(0.06, -0.04)}};
  const complex b = default_basepoint(pc);
  const auto words = default_words();
  PoleConfig pe = pc;
  pe.t[0] += complex(0.1, 0.05);
  pe.t[2] += complex(-0.05, 0.1);
  const auto traj = isomonodromic_flow(TPath::segment(pc, pe), d0, 1e-12);
  const auto ref = even_word_traces(fuchsian_monodromy(psi(pc, d0).system(pc), standard_loops(pc, b)), words);
  real s = 1;
  for (const auto& v : ref) s = std::max(s, std::abs(v));
  real drift = 0;
  const std::size_t stride = std::max<std::size_t>(1, traj.samples.size() / 4);
  for (std::size_t k = stride; k < traj.samples.size(); k += stride) {
    const auto& smp = traj.samples[k];
    const auto tr = even_word_traces(fuchsian_monodromy(psi(smp.t, smp.d).system(smp.t), standard_loops(smp.t, b)), words);
    drift = std::max(drift, max_diff(tr, ref));
  }
  const auto& e = traj.samples.back();
  const auto tr_end = even_word_traces(fuchsian_monodromy(psi(e.t, e.d).system(e.t), standard_loops(e.t, b)), words);
  drift = std::max(drift, max_diff(tr_end, ref));
  EXPECT_LT(drift, 1e-6 * s);

  // the other linear term does not preserve monodromy
  FlowOptions other;
  other.form = PLinearTerm::log_derivative_of_F;
  const auto bad = isomonodromic_flow(TPath::segment(pc, pe), d0, 1e-12, other);
  const auto& eb = bad.samples.back();
  const auto tr_bad = even_word_traces(fuchsian_monodromy(psi(eb.t, eb.d).system(eb.t), standard_loops(eb.t, b)), words);
  EXPECT_GT(max_diff(tr_bad, ref), 1e-3);
}

TEST(RhMap, BranchSwapAndReducible)
{
  const QuadraticDifferential nu{complex(0.1, 0.05), complex(-0.2, 0.1), complex(0.15, -0.05)};
  RhOptions a, bopt;
  bopt.root_choice = 1;
  const auto ta = rh_trace_map(base_t, nu, default_words(), a), tb = rh_trace_map(base_t, nu, default_words(), bopt);
  real s = 1;
  for (const auto& v : ta) s = std::max(s, std::abs(v));
  EXPECT_LT(max_diff(ta, tb), 1e-8 * s);
  try {
    rh_trace_map(base_t, QuadraticDifferential{0.25, 1, 1}, default_words());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::reducible_determinant);
  }
}

TEST(RhMap, JacobianRankSixAndRowPermutation)
{
  const QuadraticDifferential nu{complex(0.1, 0.05), complex(-0.2, 0.1), complex(0.15, -0.05)};
  auto words = default_words();
  const auto r = rh_jacobian_rank(base_t, nu, words);
  EXPECT_EQ(r.jacobian.rows(), 7);
  EXPECT_EQ(r.jacobian.cols(), 6);
  EXPECT_EQ(r.rank.rank, 6) << r.rank.condition_ratio();
  std::reverse(words.begin(), words.end());
  EXPECT_EQ(rh_jacobian_rank(base_t, nu, words).rank.rank, r.rank.rank);
  EXPECT_THROW(rh_jacobian_rank(base_t, nu, {{0, 1}}), Error);
}

TEST(Loops, DefaultBasepointAlwaysPlans)
{
  Rng rng(77);
  int moved = 0;
  for (int n = 0; n < 200; ++n) {
    const PoleConfig pc = random_poles(rng);
    const complex b = default_basepoint(pc);
    EXPECT_NO_THROW(standard_loops(pc, b));
    if (b != basepoint_candidate(pc, 0)) ++moved;
  }
  // the search is actually exercised on this sample
  EXPECT_GT(moved, 0);
}

TEST(Loops, ConditionedBasepointReducesProductSensitivity)
{
  FuchsianSystem s;
  s.poles = PoleConfig({2.0948938099656145, 0.6451912301221592}, {1.6258268882154905, -2.847740920707905},
                       {1.4144237257809156, 0.9516116924643896});
  s.z = {complex(-0.0813, -0.0516), complex(0.0955, 0.2291), complex(-0.3032, -0.2444)};
  s.c = {complex(-0.4453, 0.3012), complex(-0.1181, 0.1642), complex(-0.2412, 0.4541)};
  const auto plain = fuchsian_monodromy(s, standard_loops(s.poles), 1e-10);
  const auto tuned = fuchsian_monodromy(s, 1e-10);
  EXPECT_LT(tuned.diagnostics.product_sensitivity, plain.diagnostics.product_sensitivity);
  // the defect tracks sensitivity times the per-matrix relative error
  EXPECT_LT(tuned.diagnostics.product_defect, 1e-6);
  EXPECT_TRUE(tuned.satisfies_invariants());
}
