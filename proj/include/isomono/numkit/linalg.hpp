#ifndef ISOMONO_NUMKIT_LINALG_HPP
#define ISOMONO_NUMKIT_LINALG_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isomono/error.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

using ComplexMatrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic>;
using ComplexVector = std::vector<complex>;

/// Optional predicate marking inputs where f must not be evaluated.
using ForbiddenRegion = std::function<bool(const ComplexVector&)>;

/// Central-difference Jacobian with one Richardson level, (4 D(h/2) - D(h)) / 3.
/// Differentiates along the real axis of each input; for holomorphic f that is the
/// complex derivative.
template <class F>
ComplexMatrix jacobian_fd(F&& f, const ComplexVector& x0, real h, const ForbiddenRegion& forbidden = {})
{
  if (!(h > 0)) throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
  const std::size_t m = x0.size();
  ComplexMatrix J;
  auto eval = [&](std::size_t k, real step) {
    ComplexVector x = x0;
    x[k] += step;
    if (forbidden && forbidden(x)) throw Error(ErrorCode::stencil_collision, "stencil point in forbidden region, input " + std::to_string(k));
    ComplexVector y = f(x);
    for (const complex& v : y)
      if (!is_finite(v)) throw Error(ErrorCode::evaluation_failure, "non-finite value on stencil, input " + std::to_string(k));
    return y;
  };
  for (std::size_t k = 0; k < m; ++k) {
    const ComplexVector fp = eval(k, h), fm = eval(k, -h), fp2 = eval(k, h / 2), fm2 = eval(k, -h / 2);
    if (k == 0) J.resize(static_cast<Eigen::Index>(fp.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < fp.size(); ++i) {
      const complex d1 = (fp[i] - fm[i]) / (2 * h);
      const complex d2 = (fp2[i] - fm2[i]) / h;
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (real(4) * d2 - d1) / real(3);
    }
  }
  return J;
}

struct RankResult
{
  int rank = 0;
  /// Descending.
  std::vector<real> singular_values;

  real condition_ratio() const
  {
    if (singular_values.empty() || singular_values.front() == 0) return 0;
    return singular_values.back() / singular_values.front();
  }
};

inline RankResult rank_svd(const ComplexMatrix& M, real rel_threshold)
{
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (!is_finite(M(i, j))) throw Error(ErrorCode::evaluation_failure, "non-finite matrix entry");
  RankResult r;
  if (M.size() == 0) return r;
  Eigen::JacobiSVD<ComplexMatrix> svd(M);
  const auto& sv = svd.singularValues();
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  const real cut = rel_threshold * (r.singular_values.empty() ? real(0) : r.singular_values.front());
  for (real s : r.singular_values)
    if (s >= cut && s > 0) ++r.rank;
  return r;
}

inline complex det3(const std::array<std::array<complex, 3>, 3>& m)
{
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}
#endif
