#include <gtest/gtest.h>

#include "isomono/genus2.hpp"
#include "test_support.hpp"

using namespace isomono;
using isomono::testing::rand_c;
using isomono::testing::random_poles;

namespace
{

Genus2System random_g2(Rng& rng)
{
  Genus2System g;
  g.poles = random_poles(rng);
  g.beta0 = rand_c(rng);
  g.beta1 = rand_c(rng);
  g.gamma0 = rand_c(rng);
  g.gamma1 = rand_c(rng);
  return g;
}

real nu_diff(const QuadraticDifferential& a, const QuadraticDifferential& b)
{
  return std::max({std::abs(a.nu0 - b.nu0), std::abs(a.nu1 - b.nu1), std::abs(a.nu2 - b.nu2)});
}

}

TEST(DetQuadratic, DirectExpansion)
{
  Genus2System g;
  g.beta1 = 1;
  g.gamma1 = 1;
  const auto nu = det_quadratic(g);
  EXPECT_EQ(nu.nu0, complex(0));
  EXPECT_EQ(nu.nu1, complex(0));
  EXPECT_EQ(nu.nu2, complex(-1));
}

TEST(DetQuadratic, PointwiseProductAndGaugeInvariance)
{
  Rng rng(30);
  for (int n = 0; n < 50; ++n) {
    const Genus2System g = random_g2(rng);
    const auto nu = det_quadratic(g);
    const complex x = rand_c(rng, 3);
    EXPECT_LT(std::abs(nu(x) + g.beta_at(x) * g.gamma_at(x)), 1e-13 * (1 + std::norm(x)) * 4);
    Genus2System h = g;
    const complex lam = rand_c(rng) + 1.5;
    h.beta0 *= lam * lam;
    h.beta1 *= lam * lam;
    h.gamma0 /= lam * lam;
    h.gamma1 /= lam * lam;
    EXPECT_LT(nu_diff(det_quadratic(h), nu), 1e-13);
  }
}

TEST(DetQuadratic, DiscriminantIsWronskianSquared)
{
  Rng rng(31);
  for (int n = 0; n < 100; ++n) {
    const Genus2System g = random_g2(rng);
    const auto nu = det_quadratic(g);
    const complex w = g.wronskian();
    EXPECT_LT(std::abs(nu.discriminant() - w * w), 1e-12 * 16);
  }
}

TEST(IsReducibleNu, Basic)
{
  EXPECT_TRUE(is_reducible_nu({1, 2, 1}, 1e-12));
  EXPECT_FALSE(is_reducible_nu({0, 1, 0}, 1e-12));
  Genus2System g;
  g.beta0 = complex(0.3, 1);
  g.beta1 = complex(-1, 0.2);
  g.gamma0 = g.beta0 * complex(2, -1);
  g.gamma1 = g.beta1 * complex(2, -1);
  EXPECT_TRUE(is_reducible_nu(det_quadratic(g), 1e-12));
  EXPECT_TRUE(g.is_reducible());
}

TEST(PhiLift, ExplicitCoefficients)
{
  const PoleConfig pc(complex(2, 1), -1.5, complex(0.3, -2));
  SigmaPoint s{0, {complex(0.4, 0.1), complex(-0.2, 0.5), complex(-0.2, -0.6)}};
  const auto g = phi_lift(pc, s);
  EXPECT_EQ(g.beta0, complex(0));
  EXPECT_EQ(g.beta1, complex(-0.5));
  const auto& t = pc.t;
  const auto& c = s.c;
  EXPECT_LT(std::abs(g.gamma1 + (t[0] * c[0] + t[1] * c[1] + t[2] * c[2])), 1e-15);
  EXPECT_LT(std::abs(g.gamma0 + (t[0] * t[1] * c[2] + t[1] * t[2] * c[0] + t[2] * t[0] * c[1])), 1e-14);
  EXPECT_THROW(phi_lift(pc, SigmaPoint{0, {1, 1, 1}}), Error);
}

TEST(PhiLift, GaugedConnectionShape)
{
  // on Sigma, conjugating A(x) by (1 z; 0 1) gives (0, b/(x(x-1)); c/prod(x - ti), trace part)
  Rng rng(32);
  for (int n = 0; n < 20; ++n) {
    const PoleConfig pc = random_poles(rng);
    const SigmaPoint s{rand_c(rng), {rand_c(rng), rand_c(rng), 0}};
    SigmaPoint sp = s;
    sp.c[2] = -s.c[0] - s.c[1];
    const auto g = phi_lift(pc, sp);
    const complex x = rand_c(rng, 3) + complex(0, 0.05);
    const Matrix2 A = connection_coefficient(sp.system(pc), x);
    const Matrix2 G{1, sp.z, 0, 1};
    const Matrix2 Ag = G.inverse() * A * G;
    const complex T = (x - pc.t[0]) * (x - pc.t[1]) * (x - pc.t[2]);
    const complex tr22 = 0.5 * (1.0 / (x - pc.t[0]) + 1.0 / (x - pc.t[1]) + 1.0 / (x - pc.t[2]) - 1.0 / x - 1.0 / (x - 1.0));
    const real sc = 1 + A.max_abs() * (1 + std::abs(sp.z)) * (1 + std::abs(sp.z));
    EXPECT_LT(std::abs(Ag.a), 1e-12 * sc);
    EXPECT_LT(std::abs(Ag.b - g.beta_at(x) / (x * (x - 1.0))), 1e-12 * sc);
    EXPECT_LT(std::abs(Ag.c - g.gamma_at(x) / T), 1e-12 * sc);
    EXPECT_LT(std::abs(Ag.d - tr22), 1e-12 * sc);
  }
}

TEST(PhiLift, ReducibleIffRedLocus)
{
  Rng rng(33);
  for (int n = 0; n < 50; ++n) {
    const PoleConfig pc = random_poles(rng);
    const complex c1 = rand_c(rng), c2 = rand_c(rng);
    const std::array<complex, 3> c{c1, c2, -c1 - c2};
    const complex Q0 = q_zero(pc, c), Qi = q_infinity(pc, c);
    const complex zr = Q0 / (Qi + 2.0 * Q0);
    EXPECT_TRUE(is_reducible_nu(det_quadratic(phi_lift(pc, SigmaPoint{zr, c})), 1e-10));
    EXPECT_FALSE(is_reducible_nu(det_quadratic(phi_lift(pc, SigmaPoint{zr + 0.3, c})), 1e-10));
  }
}

TEST(SectionPhi, ExplicitZAndRoundTrip)
{
  Rng rng(34);
  for (int n = 0; n < 100; ++n) {
    const PoleConfig pc = random_poles(rng);
    const QuadraticDifferential nu{rand_c(rng), rand_c(rng), rand_c(rng) + 0.2};
    for (int choice = 0; choice < 2; ++choice) {
      const auto roots = nu_roots(nu);
      const complex xb = roots[choice];
      const SigmaPoint s = section_phi(pc, nu, choice);
      EXPECT_LT(std::abs(s.z - xb / (2.0 * xb - 1.0)), 1e-13 * (1 + std::abs(s.z)));
      EXPECT_LT(std::abs(s.c[0] + s.c[1] + s.c[2]), 1e-10 * (1 + std::abs(s.c[0])));
      EXPECT_LT(nu_diff(det_quadratic(phi_lift(pc, s)), nu), 1e-10 * std::max(1.0, nu.scale()));
    }
    const SigmaPoint a = section_phi(pc, nu, 0), b = section_phi(pc, nu, 1);
    EXPECT_GT(std::abs(a.z - b.z), 1e-8);
  }
}

TEST(SectionPhi, Errors)
{
  const PoleConfig pc(2, 3, 5);
  try {
    section_phi(pc, {1, 2, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::root_at_infinity);
  }
  // roots 1/2 and 3: nu = (x - 1/2)(x - 3)
  const QuadraticDifferential nu{1.5, -3.5, 1};
  const auto roots = nu_roots(nu);
  const int half = std::abs(roots[0] - 0.5) < 1e-12 ? 0 : 1;
  try {
    section_phi(pc, nu, half);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::exceptional_decomposition);
  }
  EXPECT_NO_THROW(section_phi(pc, nu, 1 - half));
}

TEST(Tangency, GenericHeightGivesTwoPoints)
{
  Rng rng(35);
  for (int n = 0; n < 50; ++n) {
    const Genus2System g = random_g2(rng);
    const auto pts = tangency_points(g, Height::at(rand_c(rng, 2)));
    EXPECT_EQ(total_multiplicity(pts), 2);
    ASSERT_EQ(pts.size(), 2u);
    // both sheets over the same x, and the form vanishes there
    EXPECT_EQ(pts[0].x, pts[1].x);
    const complex F = curve_polynomial(g.poles)(pts[0].x);
    EXPECT_LT(std::abs(pts[0].y * pts[0].y - F), 1e-10 * (1 + std::abs(F)));
  }
  const Genus2System g = random_g2(rng);
  EXPECT_EQ(total_multiplicity(tangency_points(g, Height::infinity())), 2);
}

TEST(Tangency, WeierstrassAndInfinityDoublePoints)
{
  Rng rng(36);
  const Genus2System g = random_g2(rng);
  // choose p with x* = t2: (g1 t2 + g0) p^2 = b1 t2 + b0
  const complex w = g.poles.t[1];
  const complex p = std::sqrt(g.beta_at(w) / g.gamma_at(w));
  const auto pts = tangency_points(g, Height::at(p));
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].multiplicity, 2);
  EXPECT_LT(std::abs(pts[0].x - w), 1e-12);

  const complex pinf = std::sqrt(g.beta1 / g.gamma1);
  const auto at_inf = tangency_points(g, Height::at(pinf));
  ASSERT_EQ(at_inf.size(), 1u);
  EXPECT_TRUE(at_inf[0].at_infinity);
  EXPECT_EQ(at_inf[0].multiplicity, 2);
}

TEST(Tangency, InvariantHorizontal)
{
  Genus2System g;
  g.beta0 = 1;
  g.beta1 = 2;
  g.gamma0 = 4;
  g.gamma1 = 8;  // gamma = 4 beta, so p = 1/2 kills the form
  try {
    tangency_points(g, Height::at(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invariant_horizontal);
  }
}

TEST(SpecialFibers, TwelveDistinctAndEachADoublePoint)
{
  Rng rng(37);
  for (int n = 0; n < 20; ++n) {
    const Genus2System g = random_g2(rng);
    const auto f = twelve_special_fibers(g);
    EXPECT_EQ(total_multiplicity(f), 12);
    EXPECT_EQ(f.size(), 12u);
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (std::size_t j = i + 1; j < f.size(); ++j) EXPECT_GT(std::abs(f[i].p.value - f[j].p.value), 1e-8);
      const auto pts = tangency_points(g, f[i].p);
      ASSERT_EQ(pts.size(), 1u);
      EXPECT_EQ(pts[0].multiplicity, 2);
      if (f[i].w == PoleLabel::infinity) EXPECT_TRUE(pts[0].at_infinity);
      else EXPECT_LT(std::abs(pts[0].x - position(g.poles, f[i].w)), 1e-9);
    }
  }
}

TEST(SpecialFibers, DegreeCollapseWhenReducible)
{
  Genus2System g;
  g.beta0 = 1;
  g.beta1 = 2;
  g.gamma0 = 3;
  g.gamma1 = 6;
  try {
    twelve_special_fibers(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degree_collapse);
  }
}

TEST(SpecialFibers, RootAtInfinityWhenGammaVanishesAtW)
{
  Genus2System g;
  g.poles = PoleConfig(2, 3, 5);
  g.beta0 = 1;
  g.beta1 = complex(0.5, 1);
  g.gamma0 = -2;  // gamma(2) = 0 with gamma1 = 1
  g.gamma1 = 1;
  const auto f = twelve_special_fibers(g);
  EXPECT_EQ(total_multiplicity(f), 12);
  bool found = false;
  for (const auto& x : f)
    if (x.w == PoleLabel::t1) {
      EXPECT_TRUE(x.p.infinite);
      found = true;
    }
  EXPECT_TRUE(found);
  EXPECT_TRUE(self_intersection(g).non_generic);
}

TEST(SelfIntersection, MinusFourOnGenericSamples)
{
  Rng rng(38);
  for (int n = 0; n < 20; ++n) {
    const auto r = self_intersection(random_g2(rng));
    EXPECT_EQ(r.value, -4);
    EXPECT_EQ(r.c1_wedge, -2);
    EXPECT_EQ(r.branch_count, 12);
    EXPECT_FALSE(r.non_generic);
  }
}
