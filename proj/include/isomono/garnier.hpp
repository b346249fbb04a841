#ifndef ISOMONO_GARNIER_HPP
#define ISOMONO_GARNIER_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "isomono/darboux.hpp"
#include "isomono/error.hpp"
#include "isomono/fuchsian.hpp"
#include "isomono/numkit/ode.hpp"
#include "isomono/numkit/polynomial.hpp"

namespace isomono
{

/// Coefficient P of the linear-in-p term F(q) p^2 - P(q) p + F(q) p / (q - ti).
enum class PLinearTerm
{
  /// P = F G~ with G~ = (1/2) d/dx log(prod(x - tm) / (x (x - 1))), the trace-connection log-derivative.
  /// This is the form whose flow preserves monodromy for the connection family used here.
  trace_connection,
  /// P = F G = F'/2 with G = F'/(2F), the log-derivative of F itself.
  log_derivative_of_F
};

constexpr const char* to_string(PLinearTerm f)
{
  return f == PLinearTerm::trace_connection ? "trace-connection" : "log-derivative-of-F";
}

/// Polynomials entering the Hamiltonians at a fixed t.
struct GarnierPolys
{
  ComplexPoly F, dF, P, dP;
  /// F(x)/(x - ti) and its derivative.
  std::array<ComplexPoly, 3> Fi, dFi;

  GarnierPolys(const PoleConfig& pc, PLinearTerm form)
  {
    const auto& t = pc.t;
    const std::array<complex, 5> roots{complex(0), complex(1), t[0], t[1], t[2]};
    F = ComplexPoly::from_roots(roots);
    dF = F.derivative();
    if (form == PLinearTerm::log_derivative_of_F) {
      P = complex(0.5) * dF;
    } else {
      const std::array<complex, 3> tr{t[0], t[1], t[2]};
      const ComplexPoly T = ComplexPoly::from_roots(tr);
      const ComplexPoly xx1({0, -1, 1});
      const ComplexPoly two_x_minus_1({-1, 2});
      P = complex(0.5) * (xx1 * T.derivative() - two_x_minus_1 * T);
    }
    dP = P.derivative();
    for (std::size_t i = 0; i < 3; ++i) {
      std::array<complex, 4> r{complex(0), complex(1), t[(i + 1) % 3], t[(i + 2) % 3]};
      Fi[i] = ComplexPoly::from_roots(r);
      dFi[i] = Fi[i].derivative();
    }
  }
};

/// t_i (t_i - 1) prod_{j != i} (t_j - t_i).
inline complex hamiltonian_prefactor(const PoleConfig& pc, std::size_t i)
{
  const auto& t = pc.t;
  const complex ti = t[i];
  return ti * (ti - real(1)) * (t[(i + 1) % 3] - ti) * (t[(i + 2) % 3] - ti);
}

namespace detail
{

/// w_ij = prod_{k != j} (q_k - t_i) / (q_k - q_j)
inline complex garnier_weight(const DarbouxPoint& d, complex ti, std::size_t j)
{
  const auto [a, b] = others(j);
  return (d.q[a] - ti) * (d.q[b] - ti) / ((d.q[a] - d.q[j]) * (d.q[b] - d.q[j]));
}

}

struct HamiltonianGradient
{
  std::array<complex, 3> dq{};  // dH / dq_k
  std::array<complex, 3> dp{};  // dH / dp_k
};

inline void check_index(int i)
{
  if (i < 1 || i > 3) throw Error(ErrorCode::invalid_argument, "Hamiltonian index must be 1, 2 or 3");
}

inline complex hamiltonian(const PoleConfig& pc, const DarbouxPoint& d, int i, const GarnierPolys& polys)
{
  check_index(i);
  check_q_distinct(d);
  const std::size_t ii = static_cast<std::size_t>(i - 1);
  const complex ti = pc.t[ii];
  complex s = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const complex q = d.q[j], p = d.p[j];
    s += detail::garnier_weight(d, ti, j) * (polys.F(q) * p * p - polys.P(q) * p + polys.Fi[ii](q) * p);
  }
  return s / hamiltonian_prefactor(pc, ii);
}

inline complex hamiltonian(const PoleConfig& pc, const DarbouxPoint& d, int i,
                           PLinearTerm form = PLinearTerm::trace_connection)
{
  return hamiltonian(pc, d, i, GarnierPolys(pc, form));
}

/// Closed-form partial derivatives of H_i.
inline HamiltonianGradient hamiltonian_gradient(const PoleConfig& pc, const DarbouxPoint& d, int i, const GarnierPolys& polys)
{
  check_index(i);
  check_q_distinct(d);
  const std::size_t ii = static_cast<std::size_t>(i - 1);
  const complex ti = pc.t[ii];
  const complex K = hamiltonian_prefactor(pc, ii);
  const auto& q = d.q;
  std::array<complex, 3> w{}, g{};
  for (std::size_t j = 0; j < 3; ++j) {
    w[j] = detail::garnier_weight(d, ti, j);
    const complex p = d.p[j];
    g[j] = polys.F(q[j]) * p * p - polys.P(q[j]) * p + polys.Fi[ii](q[j]) * p;
  }
  HamiltonianGradient out;
  for (std::size_t k = 0; k < 3; ++k) {
    const complex qk = q[k], pk = d.p[k];
    out.dp[k] = w[k] * (real(2) * polys.F(qk) * pk - polys.P(qk) + polys.Fi[ii](qk)) / K;

    complex acc = w[k] * (polys.dF(qk) * pk * pk - polys.dP(qk) * pk + polys.dFi[ii](qk) * pk);
    for (std::size_t j = 0; j < 3; ++j) {
      complex dw;
      if (j == k) {
        const auto [a, b] = detail::others(j);
        dw = w[j] * (real(1) / (q[a] - q[j]) + real(1) / (q[b] - q[j]));
      } else {
        // the factor of w_ij containing q_k is (q_k - t_i)/(q_k - q_j), with derivative (t_i - q_j)/(q_k - q_j)^2
        const std::size_t m = 3 - j - k;
        dw = (ti - q[j]) / ((q[k] - q[j]) * (q[k] - q[j])) * (q[m] - ti) / (q[m] - q[j]);
      }
      acc += dw * g[j];
    }
    out.dq[k] = acc / K;
  }
  return out;
}

struct VectorField
{
  std::array<complex, 3> dq{};
  std::array<complex, 3> dp{};
};

/// q-p components of V_i: dq_k = dH_i/dp_k, dp_k = -dH_i/dq_k.
inline VectorField garnier_vector_field(const PoleConfig& pc, const DarbouxPoint& d, int i, const GarnierPolys& polys)
{
  const auto g = hamiltonian_gradient(pc, d, i, polys);
  VectorField v;
  for (std::size_t k = 0; k < 3; ++k) {
    v.dq[k] = g.dp[k];
    v.dp[k] = -g.dq[k];
  }
  return v;
}

inline VectorField garnier_vector_field(const PoleConfig& pc, const DarbouxPoint& d, int i,
                                        PLinearTerm form = PLinearTerm::trace_connection)
{
  return garnier_vector_field(pc, d, i, GarnierPolys(pc, form));
}

/// Piecewise-linear path in T given by its waypoints.
struct TPath
{
  std::vector<PoleConfig> waypoints;

  static TPath segment(const PoleConfig& a, const PoleConfig& b) { return {{a, b}}; }

  /// Path moving t_i (1-based) by delta.
  static TPath along(const PoleConfig& a, int i, complex delta)
  {
    PoleConfig b = a;
    b.t[static_cast<std::size_t>(i - 1)] += delta;
    return segment(a, b);
  }

  TPath reversed() const { return {std::vector<PoleConfig>(waypoints.rbegin(), waypoints.rend())}; }
};

struct FlowSample
{
  real s = 0;
  PoleConfig t;
  DarbouxPoint d;
};

struct FlowTrajectory
{
  std::vector<FlowSample> samples;
  real tol = 0;
  IntegrationStats stats;
  real min_q_gap_seen = 0;

  const DarbouxPoint& end_point() const { return samples.back().d; }
  const PoleConfig& end_poles() const { return samples.back().t; }
};

struct FlowOptions
{
  PLinearTerm form = PLinearTerm::trace_connection;
  /// Abort when min |qi - qj| falls below this times max(1, |q|).
  real collision_guard = 1e-5;
  /// Minimum separation of t from {0, 1} and of the ti from each other along the path.
  real t_guard = 1e-6;
  bool record_samples = true;
};

/// Integrates dq_k/dti = dHi/dpk, dp_k/dti = -dHi/dqk along a piecewise-linear path in T.
/// Each segment is parametrized by s in [0, 1]; samples report the cumulative s = segment index + local s.
inline FlowTrajectory isomonodromic_flow(const TPath& path, const DarbouxPoint& d0, real tol, const FlowOptions& opt = {})
{
  if (path.waypoints.empty()) throw Error(ErrorCode::invalid_argument, "empty path in T");
  for (const auto& w : path.waypoints)
    if (!w.valid(opt.t_guard)) throw Error(ErrorCode::left_parameter_space, "path waypoint outside T");

  FlowTrajectory traj;
  traj.tol = tol;
  traj.min_q_gap_seen = min_q_gap(d0);
  traj.samples.push_back({0, path.waypoints.front(), d0});
  check_q_distinct(d0);

  CVec<6> y{};
  for (int k = 0; k < 3; ++k) {
    y[k] = d0.q[k];
    y[k + 3] = d0.p[k];
  }
  auto unpack = [](const CVec<6>& v) { return DarbouxPoint{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}}; };

  StepControl ctl;
  ctl.rtol = tol;
  for (std::size_t seg = 1; seg < path.waypoints.size(); ++seg) {
    const PoleConfig a = path.waypoints[seg - 1], b = path.waypoints[seg];
    std::array<complex, 3> delta{b.t[0] - a.t[0], b.t[1] - a.t[1], b.t[2] - a.t[2]};
    if (delta[0] == complex(0) && delta[1] == complex(0) && delta[2] == complex(0)) continue;
    auto t_at = [&](real s) { return PoleConfig(a.t[0] + s * delta[0], a.t[1] + s * delta[1], a.t[2] + s * delta[2]); };
    auto guard = [&](real s, const DarbouxPoint& d) {
      const real gap = min_q_gap(d);
      if (gap < opt.collision_guard * d.scale())
        throw Error(ErrorCode::critical_locus, "critical locus at s=" + std::to_string(real(seg - 1) + s));
      return gap;
    };
    auto rhs = [&](real s, const CVec<6>& v) {
      const PoleConfig pc = t_at(s);
      if (!pc.valid(opt.t_guard)) throw Error(ErrorCode::left_parameter_space, "path leaves T at s=" + std::to_string(real(seg - 1) + s));
      const DarbouxPoint d = unpack(v);
      guard(s, d);
      CVec<6> out{};
      const GarnierPolys polys(pc, opt.form);
      for (int i = 0; i < 3; ++i) {
        if (delta[static_cast<std::size_t>(i)] == complex(0)) continue;
        const VectorField vf = garnier_vector_field(pc, d, i + 1, polys);
        for (int k = 0; k < 3; ++k) {
          out[k] += delta[static_cast<std::size_t>(i)] * vf.dq[k];
          out[k + 3] += delta[static_cast<std::size_t>(i)] * vf.dp[k];
        }
      }
      return out;
    };
    auto observer = [&](real s, const CVec<6>& v) {
      const DarbouxPoint d = unpack(v);
      traj.min_q_gap_seen = std::min(traj.min_q_gap_seen, guard(s, d));
      if (opt.record_samples || s == real(1)) traj.samples.push_back({real(seg - 1) + s, t_at(s), d});
    };
    auto r = integrate_dopri<6>(rhs, y, real(0), real(1), ctl, NoStepCap{}, observer);
    y = r.state;
    traj.stats.accepted += r.stats.accepted;
    traj.stats.rejected += r.stats.rejected;
    traj.stats.rhs_evaluations += r.stats.rhs_evaluations;
    traj.samples.back().t = b;
  }
  return traj;
}

}
#endif
