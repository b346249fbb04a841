#ifndef ISOMONO_NUMKIT_ODE_HPP
#define ISOMONO_NUMKIT_ODE_HPP

#include <algorithm>
#include <array>
#include <initializer_list>
#include <utility>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "isomono/error.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

template <std::size_t N>
using CVec = std::array<complex, N>;

struct StepControl
{
  real rtol = 1e-10;
  /// Absolute tolerance; a negative value means 1e-3 * rtol.
  real atol = -1;
  real initial_step = 0;
  std::size_t max_steps = 2'000'000;

  real effective_atol() const { return atol < 0 ? real(1e-3) * rtol : atol; }
};

struct IntegrationStats
{
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  real last_step = 0;
};

template <std::size_t N>
struct IntegrationResult
{
  CVec<N> state{};
  IntegrationStats stats;
};

struct NoStepCap
{
  template <class S>
  real operator()(real, const S&) const { return std::numeric_limits<real>::infinity(); }
};

struct NoObserver
{
  template <class S>
  void operator()(real, const S&) const {}
};

namespace detail
{

template <std::size_t N>
CVec<N> axpy(const CVec<N>& y, real h, std::initializer_list<std::pair<real, const CVec<N>*>> terms)
{
  CVec<N> out = y;
  for (const auto& [coef, k] : terms) {
    if (coef == 0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += (h * coef) * (*k)[i];
  }
  return out;
}

template <std::size_t N>
bool all_finite(const CVec<N>& v)
{
  for (const auto& x : v)
    if (!is_finite(x)) return false;
  return true;
}

}

/// Dormand-Prince 5(4) with PI step-size control on y' = rhs(s, y), from s0 to s1
/// (either direction). Error norm is the RMS of componentwise errors scaled
/// by atol + rtol * max(|y|, |y_new|).
///
/// step_cap(s, y) bounds |h| from above before each attempt; observer(s, y) is
/// called after every accepted step, including the final one.
template <std::size_t N, class Rhs, class StepCap = NoStepCap, class Observer = NoObserver>
IntegrationResult<N> integrate_dopri(Rhs&& rhs, CVec<N> y, real s0, real s1, const StepControl& ctl,
                                     StepCap&& step_cap = {}, Observer&& observer = {})
{
  // Butcher tableau
  constexpr real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr real a21 = 1.0 / 5;
  constexpr real a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
  constexpr real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegrationResult<N> result;
  IntegrationStats& st = result.stats;
  const real span = s1 - s0;
  if (span == 0) {
    result.state = y;
    return result;
  }
  const real dir = span > 0 ? 1 : -1;
  const real length = std::abs(span);
  const real rtol = ctl.rtol;
  const real atol = ctl.effective_atol();
  const real h_min = real(1e-14) * std::max(real(1), length);

  auto eval = [&](real s, const CVec<N>& v) {
    ++st.rhs_evaluations;
    CVec<N> k = rhs(s, v);
    if (!detail::all_finite(k)) throw Error(ErrorCode::evaluation_failure, "non-finite right-hand side at s=" + std::to_string(s));
    return k;
  };

  real s = s0;
  CVec<N> k1 = eval(s, y);

  real h = ctl.initial_step > 0 ? ctl.initial_step : length * real(1e-2);
  real err_prev = real(1e-4);
  bool last_rejected = false;

  while (dir * (s1 - s) > 0) {
    if (st.accepted + st.rejected >= ctl.max_steps)
      throw Error(ErrorCode::singular_approach, "step budget exhausted at s=" + std::to_string(s));
    h = std::min({h, std::abs(s1 - s), step_cap(s, y)});
    if (h < h_min) throw Error(ErrorCode::singular_approach, "step size underflow at s=" + std::to_string(s));
    const real hs = dir * h;

    const CVec<N> k2 = eval(s + c2 * hs, detail::axpy<N>(y, hs, {{a21, &k1}}));
    const CVec<N> k3 = eval(s + c3 * hs, detail::axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}}));
    const CVec<N> k4 = eval(s + c4 * hs, detail::axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const CVec<N> k5 = eval(s + c5 * hs, detail::axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const CVec<N> k6 =
        eval(s + hs, detail::axpy<N>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const CVec<N> y_new = detail::axpy<N>(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const CVec<N> k7 = eval(s + hs, y_new);

    real acc = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const complex e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const real sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      acc += std::norm(e / sc);
    }
    const real err = std::sqrt(acc / real(N));
    if (!std::isfinite(err)) throw Error(ErrorCode::evaluation_failure, "non-finite error estimate");

    if (err <= 1) {
      // PI controller (Gustafsson), exponents as in Hairer's DOPRI5
      real fac = real(0.9) * std::pow(std::max(err, real(1e-10)), real(-0.17)) * std::pow(err_prev, real(0.04));
      fac = std::clamp(fac, real(0.2), last_rejected ? real(1) : real(10));
      s = (dir * (s1 - (s + hs)) <= h_min) ? s1 : s + hs;
      y = y_new;
      k1 = k7;
      err_prev = std::max(err, real(1e-4));
      ++st.accepted;
      st.last_step = h;
      observer(s, y);
      h *= fac;
      last_rejected = false;
    } else {
      const real fac = std::max(real(0.2), real(0.9) * std::pow(err, real(-0.2)));
      h *= fac;
      ++st.rejected;
      last_rejected = true;
    }
  }
  result.state = y;
  return result;
}

}
#endif
