#ifndef ISOMONO_NUMKIT_TRANSPORT_HPP
#define ISOMONO_NUMKIT_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "isomono/error.hpp"
#include "isomono/numkit/matrix2.hpp"
#include "isomono/numkit/ode.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

/// Piecewise-linear path through complex waypoints.
class Polyline
{
public:
  Polyline() = default;
  explicit Polyline(std::vector<complex> pts) : pts_(std::move(pts))
  {
    if (pts_.size() < 2) throw Error(ErrorCode::invalid_argument, "polyline needs at least two waypoints");
  }

  const std::vector<complex>& points() const { return pts_; }
  std::size_t segments() const { return pts_.empty() ? 0 : pts_.size() - 1; }
  complex front() const { return pts_.front(); }
  complex back() const { return pts_.back(); }
  bool closed(real tol = 0) const { return std::abs(pts_.front() - pts_.back()) <= tol; }

  real length() const
  {
    real s = 0;
    for (std::size_t k = 1; k < pts_.size(); ++k) s += std::abs(pts_[k] - pts_[k - 1]);
    return s;
  }

  Polyline reversed() const { return Polyline(std::vector<complex>(pts_.rbegin(), pts_.rend())); }

  /// This path followed by `next`; a shared junction point is not duplicated.
  Polyline then(const Polyline& next) const
  {
    std::vector<complex> out = pts_;
    auto it = next.pts_.begin();
    if (!out.empty() && out.back() == *it) ++it;
    out.insert(out.end(), it, next.pts_.end());
    return Polyline(std::move(out));
  }

  /// Shortest distance from the path to a point.
  real distance_to(complex p) const
  {
    real best = std::numeric_limits<real>::infinity();
    for (std::size_t k = 1; k < pts_.size(); ++k) best = std::min(best, segment_distance(pts_[k - 1], pts_[k], p));
    return best;
  }

  static real segment_distance(complex a, complex b, complex p)
  {
    const complex d = b - a;
    const real len2 = std::norm(d);
    if (len2 == 0) return std::abs(p - a);
    const real u = std::clamp(std::real((p - a) * std::conj(d)) / len2, real(0), real(1));
    return std::abs(p - (a + u * d));
  }

private:
  std::vector<complex> pts_;
};

inline real min_pairwise_distance(const std::vector<complex>& pts)
{
  real best = std::numeric_limits<real>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

struct TransportOptions
{
  real tol = 1e-10;
  /// Finite singular points of the coefficient; used for the safety check.
  std::vector<complex> singular_points;
  /// Minimum allowed distance from the path to any singular point.
  /// Negative selects 0.1 * (minimum pairwise distance among singular points).
  real safety_distance = -1;
  bool check_determinant = true;
};

struct TransportResult
{
  Matrix2 B;
  /// Integral of tr A(x) dx along the path.
  complex trace_integral{0, 0};
  IntegrationStats stats;
};

inline real effective_safety(const TransportOptions& opt)
{
  if (opt.safety_distance >= 0) return opt.safety_distance;
  if (opt.singular_points.size() < 2) return 0;
  return real(0.1) * min_pairwise_distance(opt.singular_points);
}

inline void check_path_clearance(const Polyline& path, const std::vector<complex>& singular, real safety)
{
  for (const complex& s : singular) {
    const real d = path.distance_to(s);
    if (d < safety) {
      throw Error(ErrorCode::singular_approach, "path passes within " + std::to_string(d) + " of singular point (" +
                                                    std::to_string(s.real()) + "," + std::to_string(s.imag()) + ")");
    }
  }
}

/// Solves dB = -A(x) B dx along the path with B(start) = I.
template <class CoeffAt>
TransportResult transport_detailed(CoeffAt&& coeff_at, const Polyline& path, const TransportOptions& opt)
{
  if (!(opt.tol > 0)) throw Error(ErrorCode::invalid_argument, "transport tolerance must be positive");
  check_path_clearance(path, opt.singular_points, effective_safety(opt));

  CVec<5> y{complex(1), complex(0), complex(0), complex(1), complex(0)};
  TransportResult res;
  StepControl ctl;
  ctl.rtol = opt.tol;

  const auto& pts = path.points();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const complex a = pts[k - 1];
    const complex dx = pts[k] - a;
    if (dx == complex(0)) continue;
    auto rhs = [&](real s, const CVec<5>& v) {
      const Matrix2 A = coeff_at(a + s * dx);
      if (!A.finite()) throw Error(ErrorCode::evaluation_failure, "non-finite connection coefficient");
      const Matrix2 B{v[0], v[1], v[2], v[3]};
      const Matrix2 D = -(A * B) * dx;
      return CVec<5>{D.a, D.b, D.c, D.d, A.trace() * dx};
    };
    auto r = integrate_dopri<5>(rhs, y, real(0), real(1), ctl);
    y = r.state;
    // continue with the last step length in x; restarting from a tiny step on every edge inflates the step count
    if (k + 1 < pts.size() && pts[k + 1] != pts[k])
      ctl.initial_step = std::min(real(1), r.stats.last_step * std::abs(dx) / std::abs(pts[k + 1] - pts[k]));
    res.stats.accepted += r.stats.accepted;
    res.stats.rejected += r.stats.rejected;
    res.stats.rhs_evaluations += r.stats.rhs_evaluations;
  }
  res.B = Matrix2{y[0], y[1], y[2], y[3]};
  res.trace_integral = y[4];

  if (opt.check_determinant) {
    const complex expected = std::exp(-res.trace_integral);
    const real scale = std::max(real(1), res.B.max_abs() * res.B.max_abs());
    const real err = std::abs(res.B.det() - expected);
    if (err > 10 * opt.tol * scale)
      throw Error(ErrorCode::accuracy_check_failed, "det B deviates from exp(-int tr A) by " + std::to_string(err));
  }
  return res;
}

template <class CoeffAt>
Matrix2 integrate_transport(CoeffAt&& coeff_at, const Polyline& path, const TransportOptions& opt)
{
  return transport_detailed(std::forward<CoeffAt>(coeff_at), path, opt).B;
}

template <class CoeffAt>
Matrix2 integrate_transport(CoeffAt&& coeff_at, const Polyline& path, real tol)
{
  TransportOptions opt;
  opt.tol = tol;
  return transport_detailed(std::forward<CoeffAt>(coeff_at), path, opt).B;
}

}
#endif
