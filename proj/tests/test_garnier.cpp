#include <gtest/gtest.h>

#include "isomono/garnier.hpp"
#include "test_support.hpp"

using namespace isomono;
using isomono::testing::rand_c;
using isomono::testing::random_poles;

namespace
{

DarbouxPoint random_point(Rng& rng, real s = 1)
{
  DarbouxPoint d;
  for (int k = 0; k < 3; ++k) {
    d.q[k] = rand_c(rng, 2) + complex(0, 0.1 * k);
    d.p[k] = rand_c(rng, s);
  }
  return d;
}

// Expanded evaluation with G written as a sum of simple fractions.
complex h_expanded(const PoleConfig& pc, const DarbouxPoint& d, int i, PLinearTerm form)
{
  const auto& t = pc.t;
  const complex ti = t[i - 1];
  auto F = [&](complex x) { return x * (x - 1.0) * (x - t[0]) * (x - t[1]) * (x - t[2]); };
  auto G = [&](complex x) {
    const complex tsum = 1.0 / (x - t[0]) + 1.0 / (x - t[1]) + 1.0 / (x - t[2]);
    if (form == PLinearTerm::log_derivative_of_F) return 0.5 * (tsum + 1.0 / x + 1.0 / (x - 1.0));
    return 0.5 * (tsum - 1.0 / x - 1.0 / (x - 1.0));
  };
  complex s = 0;
  for (int j = 0; j < 3; ++j) {
    complex num = 1, den = 1;
    for (int k = 0; k < 3; ++k)
      if (k != j) {
        num *= d.q[k] - ti;
        den *= d.q[k] - d.q[j];
      }
    const complex q = d.q[j], p = d.p[j];
    s += num / den * F(q) * (p * p - G(q) * p + p / (q - ti));
  }
  complex pre = ti * (ti - 1.0);
  for (int j = 0; j < 3; ++j)
    if (j != i - 1) pre *= t[j] - ti;
  return s / pre;
}

real dist(const DarbouxPoint& a, const DarbouxPoint& b)
{
  real m = 0;
  for (int k = 0; k < 3; ++k) m = std::max({m, std::abs(a.q[k] - b.q[k]), std::abs(a.p[k] - b.p[k])});
  return m;
}

const std::array<PLinearTerm, 2> forms{PLinearTerm::trace_connection, PLinearTerm::log_derivative_of_F};

}

TEST(Hamiltonian, VanishesAtZeroMomentum)
{
  Rng rng(40);
  for (int n = 0; n < 20; ++n) {
    const PoleConfig pc = random_poles(rng);
    DarbouxPoint d = random_point(rng);
    d.p = {0, 0, 0};
    for (auto f : forms)
      for (int i = 1; i <= 3; ++i) EXPECT_EQ(hamiltonian(pc, d, i, f), complex(0));
  }
}

TEST(Hamiltonian, AgreesWithExpandedEvaluator)
{
  Rng rng(41);
  for (int n = 0; n < 100; ++n) {
    const PoleConfig pc = random_poles(rng);
    const DarbouxPoint d = random_point(rng);
    for (auto f : forms)
      for (int i = 1; i <= 3; ++i) {
        const complex a = hamiltonian(pc, d, i, f), b = h_expanded(pc, d, i, f);
        EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(b)));
      }
  }
}

TEST(Hamiltonian, FormsDifferByLinearTerm)
{
  const PoleConfig pc(complex(2, 1), -1.5, complex(0.3, -2));
  const DarbouxPoint d{{0.3, complex(1, 1), -2}, {0.5, -0.25, complex(0, 1)}};
  EXPECT_GT(std::abs(hamiltonian(pc, d, 1, PLinearTerm::trace_connection) -
                     hamiltonian(pc, d, 1, PLinearTerm::log_derivative_of_F)),
            1e-3);
}

TEST(Hamiltonian, Errors)
{
  const PoleConfig pc(2, 3, 5);
  DarbouxPoint d{{0.3, 0.3, -2}, {1, 1, 1}};
  try {
    hamiltonian(pc, d, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::critical_locus);
  }
  d.q[1] = 0.7;
  EXPECT_THROW(hamiltonian(pc, d, 0), Error);
  EXPECT_THROW(hamiltonian(pc, d, 4), Error);
}

TEST(VectorField, ClosedFormMatchesFiniteDifferences)
{
  Rng rng(42);
  real worst = 0;
  for (int n = 0; n < 100; ++n) {
    const PoleConfig pc = random_poles(rng);
    const DarbouxPoint d = random_point(rng);
    for (auto f : forms)
      for (int i = 1; i <= 3; ++i) {
        const auto g = hamiltonian_gradient(pc, d, i, GarnierPolys(pc, f));
        const ComplexMatrix J = jacobian_fd(
            [&](const ComplexVector& x) { return ComplexVector{hamiltonian(pc, DarbouxPoint::from_flat(x), i, f)}; },
            d.flat(), 1e-4);
        real gmax = 0;
        for (int k = 0; k < 3; ++k) gmax = std::max({gmax, std::abs(g.dq[k]), std::abs(g.dp[k])});
        for (int k = 0; k < 3; ++k) {
          worst = std::max(worst, std::abs(J(0, k) - g.dq[k]) / std::max(1.0, gmax));
          worst = std::max(worst, std::abs(J(0, k + 3) - g.dp[k]) / std::max(1.0, gmax));
        }
      }
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(VectorField, NoMomentumDriftAtZeroMomentum)
{
  Rng rng(43);
  const PoleConfig pc = random_poles(rng);
  DarbouxPoint d = random_point(rng);
  d.p = {0, 0, 0};
  for (auto f : forms)
    for (int i = 1; i <= 3; ++i) {
      const auto v = garnier_vector_field(pc, d, i, f);
      for (int k = 0; k < 3; ++k) EXPECT_EQ(v.dp[k], complex(0));
    }
}

TEST(VectorField, IsHamiltonian)
{
  Rng rng(44);
  const PoleConfig pc = random_poles(rng);
  const DarbouxPoint d = random_point(rng);
  const auto g = hamiltonian_gradient(pc, d, 2, GarnierPolys(pc, PLinearTerm::trace_connection));
  const auto v = garnier_vector_field(pc, d, 2);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(v.dq[k], g.dp[k]);
    EXPECT_EQ(v.dp[k], -g.dq[k]);
  }
}

class FlowTest : public ::testing::Test
{
protected:
  PoleConfig pc{complex(2, 0.5), complex(-1.5, 1), complex(0.5, -2)};
  DarbouxPoint d0{{complex(0.4, 0.3), complex(-0.7, 0.6), complex(1.6, -0.5)}, {complex(0.2, 0.1), complex(-0.3, 0.2), complex(0.1, -0.25)}};
  real tol = 1e-11;
};

TEST_F(FlowTest, ZeroLengthPath)
{
  const auto tr = isomonodromic_flow(TPath::segment(pc, pc), d0, tol);
  EXPECT_EQ(dist(tr.end_point(), d0), 0);
}

TEST_F(FlowTest, MatchesVectorFieldInitially)
{
  const complex h = 1e-4;
  const auto tr = isomonodromic_flow(TPath::along(pc, 2, h), d0, 1e-13);
  const auto v = garnier_vector_field(pc, d0, 2);
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT(std::abs((tr.end_point().q[k] - d0.q[k]) / h - v.dq[k]), 1e-3 * (1 + std::abs(v.dq[k])));
    EXPECT_LT(std::abs((tr.end_point().p[k] - d0.p[k]) / h - v.dp[k]), 1e-3 * (1 + std::abs(v.dp[k])));
  }
}

TEST_F(FlowTest, ForwardThenReverseReturns)
{
  PoleConfig b = pc;
  b.t[0] += complex(0.2, 0.1);
  b.t[2] += complex(-0.1, 0.15);
  const TPath path = TPath::segment(pc, b);
  for (auto f : forms) {
    FlowOptions opt;
    opt.form = f;
    const auto fw = isomonodromic_flow(path, d0, tol, opt);
    EXPECT_GT(dist(fw.end_point(), d0), 1e-3);
    const auto bw = isomonodromic_flow(path.reversed(), fw.end_point(), tol, opt);
    EXPECT_LT(dist(bw.end_point(), d0), 100 * tol * d0.scale());
    EXPECT_GT(fw.samples.size(), 2u);
    EXPECT_EQ(fw.end_poles().t, b.t);
  }
}

TEST_F(FlowTest, ClosedSquareReturnsToStart)
{
  const complex h = 0.1;
  PoleConfig a = pc, b = pc, c = pc;
  a.t[0] += h;
  b.t[0] += h;
  b.t[1] += complex(0, 1) * h;
  c.t[1] += complex(0, 1) * h;
  const TPath sq{{pc, a, b, c, pc}};
  const auto tr = isomonodromic_flow(sq, d0, tol);
  EXPECT_LT(dist(tr.end_point(), d0), 1e-6);
}

TEST_F(FlowTest, VectorFieldsCommute)
{
  const complex h = 1e-2;
  PoleConfig a = pc, b = pc, ab = pc;
  a.t[0] += h;
  b.t[1] += h;
  ab.t[0] += h;
  ab.t[1] += h;
  const auto one = isomonodromic_flow(TPath{{pc, a, ab}}, d0, tol);
  const auto two = isomonodromic_flow(TPath{{pc, b, ab}}, d0, tol);
  EXPECT_LT(dist(one.end_point(), two.end_point()), 1e-6);
}

TEST_F(FlowTest, LeftParameterSpace)
{
  PoleConfig b = pc;
  b.t[0] = complex(0, 0);
  try {
    isomonodromic_flow(TPath::segment(pc, b), d0, tol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::left_parameter_space);
  }
  // segment crossing t2 = t3 without stopping there
  PoleConfig c = pc;
  c.t[1] = pc.t[2] + (pc.t[2] - pc.t[1]);
  PoleConfig mid = pc;
  mid.t[1] = pc.t[2];
  EXPECT_FALSE(mid.valid(1e-6));
  try {
    isomonodromic_flow(TPath::segment(pc, c), d0, tol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::left_parameter_space || e.code() == ErrorCode::critical_locus ||
                e.code() == ErrorCode::singular_approach);
  }
}

TEST_F(FlowTest, CriticalLocusAtStart)
{
  DarbouxPoint d = d0;
  d.q[1] = d.q[0];
  try {
    isomonodromic_flow(TPath::along(pc, 1, 0.1), d, tol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::critical_locus);
  }
}
