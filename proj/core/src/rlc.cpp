#include <numeric>
#include <string>

#include "hcmm/coding.hpp"

namespace hcmm {

std::vector<RlcBlock> rlc_encode(const DenseMatrix& A, std::span<const std::int64_t> loads,
                                 Rng& rng) {
  std::vector<DenseMatrix> coding;
  coding.reserve(loads.size());
  for (std::int64_t l : loads) {
    if (l < 0) throw std::invalid_argument("rlc_encode: negative load");
    DenseMatrix S(static_cast<std::size_t>(l), A.rows());
    for (double& v : S.data()) v = rng.normal();
    coding.push_back(std::move(S));
  }
  return rlc_encode_with(A, std::move(coding));
}

std::vector<RlcBlock> rlc_encode_with(const DenseMatrix& A, std::vector<DenseMatrix> coding) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("rlc_encode: empty matrix");
  std::size_t total = 0;
  for (const auto& S : coding) {
    if (S.rows() > 0 && S.cols() != A.rows()) {
      throw std::invalid_argument("rlc_encode: coding matrix has " + std::to_string(S.cols()) +
                                  " columns, expected " + std::to_string(A.rows()));
    }
    total += S.rows();
  }
  if (total < A.rows()) {
    throw std::invalid_argument("rlc_encode: " + std::to_string(total) +
                                " coded rows cannot recover " + std::to_string(A.rows()));
  }
  std::vector<RlcBlock> blocks;
  blocks.reserve(coding.size());
  for (std::size_t i = 0; i < coding.size(); ++i) {
    RlcBlock b;
    b.worker = static_cast<int>(i);
    b.coded = coding[i].rows() > 0 ? coding[i].multiply(A) : DenseMatrix(0, A.cols());
    b.coding = std::move(coding[i]);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<double> rlc_decode(const DenseMatrix& received_coding, std::span<const double> z) {
  if (received_coding.rows() != received_coding.cols()) {
    throw std::invalid_argument("rlc_decode: need exactly r received rows, got " +
                                std::to_string(received_coding.rows()) + " for r = " +
                                std::to_string(received_coding.cols()));
  }
  return solve_partial_pivoting(received_coding, std::vector<double>(z.begin(), z.end()));
}

}  // namespace hcmm
