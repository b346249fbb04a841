#ifndef ISOMONO_NUMKIT_POLYNOMIAL_HPP
#define ISOMONO_NUMKIT_POLYNOMIAL_HPP

#include <algorithm>
#include <initializer_list>
#include <span>
#include <vector>

#include "isomono/error.hpp"
#include "isomono/numkit/scalar.hpp"

namespace isomono
{

/// Dense complex polynomial, coefficients lowest degree first.
class ComplexPoly
{
public:
  ComplexPoly() = default;
  ComplexPoly(std::initializer_list<complex> coeffs) : coeffs_(coeffs) { trim(); }
  explicit ComplexPoly(std::vector<complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static ComplexPoly constant(complex c) { return ComplexPoly({c}); }

  /// prod (x - r)
  static ComplexPoly from_roots(std::span<const complex> roots, complex leading = 1)
  {
    ComplexPoly p({leading});
    for (const complex& r : roots) p = p * ComplexPoly({-r, complex(1)});
    return p;
  }

  bool is_zero() const { return coeffs_.empty(); }

  /// Degree of the zero polynomial is reported as -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  complex coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : complex(0); }
  complex leading() const { return coeffs_.empty() ? complex(0) : coeffs_.back(); }
  const std::vector<complex>& coeffs() const { return coeffs_; }

  complex operator()(complex x) const
  {
    complex acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// sum |c_k| |x|^k, the natural magnitude against which p(x) is small.
  real magnitude_at(complex x) const
  {
    real acc = 0;
    const real ax = std::abs(x);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * ax + std::abs(*it);
    return acc;
  }

  ComplexPoly derivative() const
  {
    if (coeffs_.size() <= 1) return {};
    std::vector<complex> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * real(k);
    return ComplexPoly(std::move(d));
  }

  friend ComplexPoly operator+(const ComplexPoly& p, const ComplexPoly& q)
  {
    std::vector<complex> r(std::max(p.coeffs_.size(), q.coeffs_.size()));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = p.coeff(k) + q.coeff(k);
    return ComplexPoly(std::move(r));
  }

  friend ComplexPoly operator-(const ComplexPoly& p, const ComplexPoly& q)
  {
    std::vector<complex> r(std::max(p.coeffs_.size(), q.coeffs_.size()));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = p.coeff(k) - q.coeff(k);
    return ComplexPoly(std::move(r));
  }

  friend ComplexPoly operator*(const ComplexPoly& p, const ComplexPoly& q)
  {
    if (p.is_zero() || q.is_zero()) return {};
    std::vector<complex> r(p.coeffs_.size() + q.coeffs_.size() - 1);
    for (std::size_t i = 0; i < p.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < q.coeffs_.size(); ++j) r[i + j] += p.coeffs_[i] * q.coeffs_[j];
    return ComplexPoly(std::move(r));
  }

  friend ComplexPoly operator*(complex s, const ComplexPoly& p)
  {
    std::vector<complex> r = p.coeffs_;
    for (auto& c : r) c *= s;
    return ComplexPoly(std::move(r));
  }

private:
  void trim()
  {
    while (!coeffs_.empty() && coeffs_.back() == complex(0)) coeffs_.pop_back();
  }

  std::vector<complex> coeffs_;
};

namespace detail
{

inline complex newton_polish(const ComplexPoly& p, const ComplexPoly& dp, complex x)
{
  const complex fx = p(x);
  const complex dfx = dp(x);
  if (fx == complex(0) || std::abs(dfx) == 0) return x;
  const complex candidate = x - fx / dfx;
  return std::abs(p(candidate)) <= std::abs(fx) ? candidate : x;
}

inline std::vector<complex> quadratic_roots(complex a, complex b, complex c)
{
  const complex s = std::sqrt(b * b - real(4) * a * c);
  // choose the sign that avoids cancellation in b + s
  const complex q = std::real(std::conj(b) * s) >= 0 ? -(b + s) / real(2) : -(b - s) / real(2);
  if (q == complex(0)) return {complex(0), complex(0)};
  return {q / a, c / q};
}

inline std::vector<complex> cubic_roots(complex a, complex b, complex c, complex d)
{
  const complex B = b / a, C = c / a, D = d / a;
  const complex shift = B / real(3);
  const complex p = C - B * B / real(3);
  const complex q = real(2) * B * B * B / real(27) - B * C / real(3) + D;
  const complex disc = q * q / real(4) + p * p * p / real(27);
  const complex sq = std::sqrt(disc);
  const complex u3a = -q / real(2) + sq;
  const complex u3b = -q / real(2) - sq;
  const complex u3 = std::abs(u3a) >= std::abs(u3b) ? u3a : u3b;

  std::vector<complex> roots;
  roots.reserve(3);
  if (std::abs(u3) == 0) {
    roots.assign(3, -shift);
    return roots;
  }
  const complex u = std::pow(u3, real(1) / real(3));
  const complex omega = std::polar(real(1), real(2) * pi / real(3));
  complex uk = u;
  for (int k = 0; k < 3; ++k) {
    roots.push_back(uk - p / (real(3) * uk) - shift);
    uk *= omega;
  }
  return roots;
}

}

/// Roots of a polynomial of degree 1..3 (after trimming), each polished by a
/// single Newton step. Multiplicities are preserved.
inline std::vector<complex> poly_roots(const ComplexPoly& p)
{
  if (p.is_zero() || p.degree() < 1) throw Error(ErrorCode::degenerate_input, "polynomial of degree < 1");
  if (p.degree() > 3) throw Error(ErrorCode::invalid_argument, "poly_roots supports degree <= 3");

  std::vector<complex> roots;
  switch (p.degree()) {
  case 1: roots = {-p.coeff(0) / p.coeff(1)}; break;
  case 2: roots = detail::quadratic_roots(p.coeff(2), p.coeff(1), p.coeff(0)); break;
  default: roots = detail::cubic_roots(p.coeff(3), p.coeff(2), p.coeff(1), p.coeff(0)); break;
  }
  const ComplexPoly dp = p.derivative();
  for (auto& r : roots) r = detail::newton_polish(p, dp, r);
  return roots;
}

/// Orders complex numbers by (real, imaginary).
inline bool lex_less(const complex& x, const complex& y)
{
  return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
}

}
#endif
