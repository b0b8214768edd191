#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcmm/matrix.hpp"
#include "hcmm/rng.hpp"

namespace hcmm {

// ---------------------------------------------------------------------------
// Random linear coding: worker i stores A_i = S_i A with S_i i.i.d. N(0, 1).
// ---------------------------------------------------------------------------

struct RlcBlock {
  int worker = 0;
  DenseMatrix coding;  // loads[i] x r
  DenseMatrix coded;   // loads[i] x m
};

// Coefficients are drawn worker by worker, row by row from `rng`.
std::vector<RlcBlock> rlc_encode(const DenseMatrix& A, std::span<const std::int64_t> loads,
                                 Rng& rng);

// Same as rlc_encode with caller-supplied coding matrices.
std::vector<RlcBlock> rlc_encode_with(const DenseMatrix& A, std::vector<DenseMatrix> coding);

// Recovers A x from r received coded inner products z = S (A x).
std::vector<double> rlc_decode(const DenseMatrix& received_coding, std::span<const double> z);

// ---------------------------------------------------------------------------
// LT codes with unit coefficients over the reals.
// ---------------------------------------------------------------------------

struct LtCodeSpec {
  std::size_t k = 0;
  double c = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::vector<double> pmf;  // pmf[d - 1] = Pr[degree = d]
  std::vector<double> cdf;

  // Arbitrary degree table over {1..k}; normalized on construction.
  static LtCodeSpec from_table(std::vector<double> weights, double epsilon = 0.0,
                               double delta = 0.1);

  std::size_t sample_degree(Rng& rng) const;
  double mean_degree() const;
  // ceil(k (1 + epsilon))
  std::int64_t symbols_to_wait_for() const;
};

// S = c ln(k / delta) sqrt(k); spike at round(k / S), clamped to [1, k].
double robust_soliton_s(std::size_t k, double c, double delta);
std::size_t robust_soliton_spike(std::size_t k, double c, double delta);

LtCodeSpec robust_soliton(std::size_t k, double c, double delta, double epsilon = 0.0);
LtCodeSpec ideal_soliton(std::size_t k);

struct LtSymbol {
  std::int64_t id = 0;
  std::vector<std::uint32_t> neighbors;  // sorted, unique, < k
  std::vector<double> value;             // coded row, or one coded inner product
};

// Degree from the table, then a uniform subset via partial Fisher-Yates.
std::vector<std::uint32_t> draw_neighbors(const LtCodeSpec& spec, Rng& rng);

std::vector<LtSymbol> lt_encode(const DenseMatrix& A, std::size_t count, const LtCodeSpec& spec,
                                Rng& rng);
std::vector<LtSymbol> lt_encode_with_neighbors(const DenseMatrix& A,
                                               std::vector<std::vector<std::uint32_t>> neighbors);

// Incremental peeling decoder. Values have a fixed width (1 for inner
// products, m for whole rows, 0 to track structure only).
class PeelingDecoder {
 public:
  PeelingDecoder(std::size_t k, std::size_t width);

  // Returns true once every source value is recovered.
  bool add(std::span<const std::uint32_t> neighbors, std::span<const double> value);
  bool add(const LtSymbol& symbol) { return add(symbol.neighbors, symbol.value); }

  bool complete() const { return recovered_count_ == k_; }
  std::size_t k() const { return k_; }
  std::size_t recovered_count() const { return recovered_count_; }
  std::size_t symbols_received() const { return received_; }
  std::size_t substitutions() const { return substitutions_; }
  bool recovered(std::size_t i) const { return recovered_[i] != 0; }
  std::span<const double> value(std::size_t i) const;
  // k * width values, row-major; unrecovered entries are 0.
  const std::vector<double>& values() const { return values_; }
  std::vector<std::size_t> unresolved() const;

 private:
  void drain_ripple();

  std::size_t k_;
  std::size_t width_;
  std::vector<double> values_;
  std::vector<char> recovered_;
  std::size_t recovered_count_ = 0;
  std::size_t received_ = 0;
  std::size_t substitutions_ = 0;

  // Pending symbols.
  std::vector<std::uint32_t> degree_;
  std::vector<std::uint64_t> index_sum_;
  std::vector<double> pending_values_;
  std::vector<std::vector<std::uint32_t>> touching_;  // source -> pending symbols
  std::vector<std::uint32_t> ripple_;
};

struct PeelResult {
  bool success = false;
  std::size_t recovered = 0;
  std::size_t substitutions = 0;
  std::vector<double> values;  // k * width
  std::vector<bool> recovered_mask;
  std::vector<std::size_t> unresolved;
};

// Symbols must share one value width.
PeelResult lt_decode_peel(std::span<const LtSymbol> symbols, std::size_t k);

struct OverheadEstimate {
  double mean_symbols = 0.0;          // over successful trials
  std::int64_t quantile_symbols = 0;  // symbols that decode with probability >= 1 - delta
  std::int64_t trials = 0;
  std::int64_t failures = 0;          // trials that never decoded within the cap
};

// Feeds symbols to a structure-only peeler until it completes; trial t uses
// root.substream(t). max_symbols = 0 means 10 k + 100.
OverheadEstimate lt_required_overhead(const LtCodeSpec& spec, std::int64_t trials, const Rng& root,
                                      std::int64_t max_symbols = 0);

// Fraction of trials that decode from the first `symbols` symbols.
double lt_success_rate(const LtCodeSpec& spec, std::int64_t symbols, std::int64_t trials,
                       const Rng& root);

// Wall-clock seconds to peel k inner products from `symbols` coded ones.
double measure_peel_seconds(const LtCodeSpec& spec, std::int64_t symbols, Rng& rng);

}  // namespace hcmm
