#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hcmm/coding.hpp"
#include "hcmm/matrix.hpp"
#include "hcmm/models.hpp"

namespace hcmm::oracle {

// Values frozen from an independent mpmath computation (50 digits).
inline constexpr double kLambdaExp11 = 2.1461932206205826;
inline constexpr double kLambdaExp05_2 = 1.0730966103102913;
inline constexpr double kLambdaExp025_4 = 0.5365483051551456;
inline constexpr double kRateExp11 = 0.31784443289937268;
inline constexpr double kXXi1 = 3.1461932206205825;
inline constexpr double kHalfGamma = 0.886226925452758;  // Gamma(1.5)

struct WeibullLambda {
  double a, mu, alpha, lambda, rate;
};
inline constexpr WeibullLambda kWeibullLambdas[] = {
    {1, 1, 1.2, 2.291718516558496, 0.32431066065419568},
    {4, 0.5, 0.8, 6.6635375031439434, 0.10740013399510998},
    {1, 0.5, 0.9, 2.4902045600887012, 0.21514657442777941},
    {4, 2, 1.2, 5.1621852016411489, 0.1813508549605377},
    {12, 0.25, 1.5, 19.075771591704683, 0.047436620356260895},
    {1, 1, 2, 2.4448124360501698, 0.35831016546057549},
};

// E[T] = a l + integral_0^inf (1 - F(a l + u)) du by double-exponential quadrature.
inline double integrated_mean(const RuntimeModel& m, std::int64_t load) {
  const double shift = m.a * static_cast<double>(load);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tail = integrator.integrate(
      [&](double u) { return 1.0 - cdf_runtime(m, load, shift + u); });
  return shift + tail;
}

// H_n = sum 1/i.
inline double harmonic(std::int64_t n) {
  double h = 0.0;
  for (std::int64_t i = n; i >= 1; --i) h += 1.0 / static_cast<double>(i);
  return h;
}

// Expected completion time of Uniform Uncoded on n i.i.d. shifted-exponential
// workers: a r / n + r H_n / (n mu).
inline double uncoded_iid_mean(std::int64_t n, double a, double mu, std::int64_t r) {
  const double rn = static_cast<double>(r) / static_cast<double>(n);
  return a * rn + rn * harmonic(n) / mu;
}

// Ideal soliton with degree-1 only symbols is a coupon collector: k H_k draws.
inline double coupon_collector(std::int64_t k) { return static_cast<double>(k) * harmonic(k); }

struct EliminationResult {
  bool full_rank = false;
  std::vector<double> values;  // k * width when full rank
};

// Solves the 0/1 system G s = z by column-pivoting QR.
inline EliminationResult lt_eliminate(std::span<const LtSymbol> symbols, std::size_t k) {
  EliminationResult out;
  if (symbols.empty()) return out;
  const std::size_t width = symbols.front().value.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(symbols.size()),
                                            static_cast<Eigen::Index>(k));
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(symbols.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    for (auto j : symbols[i].neighbors) G(static_cast<Eigen::Index>(i), j) = 1.0;
    for (std::size_t w = 0; w < width; ++w) {
      Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) = symbols[i].value[w];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  if (qr.rank() < static_cast<Eigen::Index>(k)) return out;
  const Eigen::MatrixXd S = qr.solve(Z);
  out.full_rank = true;
  out.values.resize(k * width);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t w = 0; w < width; ++w) {
      out.values[i * width + w] = S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w));
    }
  }
  return out;
}

// Dense LU reference for square systems.
inline std::vector<double> lu_solve(const DenseMatrix& S, std::span<const double> z) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(S.rows()), static_cast<Eigen::Index>(S.cols()));
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (std::size_t j = 0; j < S.cols(); ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = S(i, j);
    }
  }
  Eigen::VectorXd b(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) b(static_cast<Eigen::Index>(i)) = z[i];
  const Eigen::VectorXd y = M.fullPivLu().solve(b);
  return {y.data(), y.data() + y.size()};
}

}  // namespace hcmm::oracle
