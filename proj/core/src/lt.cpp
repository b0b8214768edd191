#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "hcmm/coding.hpp"

namespace hcmm {

LtCodeSpec LtCodeSpec::from_table(std::vector<double> weights, double epsilon, double delta) {
  if (weights.empty()) throw std::invalid_argument("degree table must cover at least degree 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("lt epsilon must be >= 0");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("degree table entries must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("degree table is all zero");

  LtCodeSpec spec;
  spec.k = weights.size();
  spec.epsilon = epsilon;
  spec.delta = delta;
  spec.pmf = std::move(weights);
  for (double& p : spec.pmf) p /= total;
  spec.cdf.resize(spec.pmf.size());
  std::partial_sum(spec.pmf.begin(), spec.pmf.end(), spec.cdf.begin());
  spec.cdf.back() = 1.0;
  return spec;
}

std::size_t LtCodeSpec::sample_degree(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto d = static_cast<std::size_t>(it - cdf.begin()) + 1;
  return std::min(d, k);
}

double LtCodeSpec::mean_degree() const {
  double m = 0.0;
  for (std::size_t d = 0; d < pmf.size(); ++d) m += static_cast<double>(d + 1) * pmf[d];
  return m;
}

std::int64_t LtCodeSpec::symbols_to_wait_for() const {
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(k) * (1.0 + epsilon) - 1e-9));
}

double robust_soliton_s(std::size_t k, double c, double delta) {
  const double kd = static_cast<double>(k);
  return c * std::log(kd / delta) * std::sqrt(kd);
}

std::size_t robust_soliton_spike(std::size_t k, double c, double delta) {
  const double s = robust_soliton_s(k, c, delta);
  const double pos = std::round(static_cast<double>(k) / s);
  return static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(k)));
}

LtCodeSpec ideal_soliton(std::size_t k) {
  if (k < 1) throw std::invalid_argument("ideal_soliton: k must be >= 1");
  std::vector<double> w(k);
  w[0] = 1.0 / static_cast<double>(k);
  for (std::size_t d = 2; d <= k; ++d) w[d - 1] = 1.0 / (static_cast<double>(d) * (d - 1));
  return LtCodeSpec::from_table(std::move(w));
}

LtCodeSpec robust_soliton(std::size_t k, double c, double delta, double epsilon) {
  if (k < 1) throw std::invalid_argument("robust_soliton: k must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("robust_soliton: c must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("robust_soliton: delta must be in (0, 1)");
  }
  const double s = robust_soliton_s(k, c, delta);
  const std::size_t spike = robust_soliton_spike(k, c, delta);
  const double kd = static_cast<double>(k);

  std::vector<double> w(k);
  for (std::size_t d = 1; d <= k; ++d) {
    const double dd = static_cast<double>(d);
    double rho = d == 1 ? 1.0 / kd : 1.0 / (dd * (dd - 1.0));
    double tau = 0.0;
    if (d < spike) tau = 1.0 / (static_cast<double>(spike) * dd);
    // ln(S/delta) goes negative for tiny S; the spike is then dropped.
    if (d == spike) tau = std::max(0.0, std::log(s / delta)) / static_cast<double>(spike);
    w[d - 1] = rho + tau;
  }
  auto spec = LtCodeSpec::from_table(std::move(w), epsilon, delta);
  spec.c = c;
  return spec;
}

std::vector<std::uint32_t> draw_neighbors(const LtCodeSpec& spec, Rng& rng) {
  const std::size_t d = spec.sample_degree(rng);
  const std::uint64_t k = spec.k;
  // Partial Fisher-Yates over a virtual identity permutation; only displaced
  // slots are stored.
  std::unordered_map<std::uint64_t, std::uint64_t> moved;
  moved.reserve(2 * d);
  auto at = [&](std::uint64_t i) {
    const auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  std::vector<std::uint32_t> out(d);
  for (std::uint64_t i = 0; i < d; ++i) {
    const std::uint64_t j = i + rng.below(k - i);
    const std::uint64_t vi = at(i);
    const std::uint64_t vj = at(j);
    moved[j] = vi;
    moved[i] = vj;
    out[i] = static_cast<std::uint32_t>(vj);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LtSymbol> lt_encode_with_neighbors(const DenseMatrix& A,
                                               std::vector<std::vector<std::uint32_t>> neighbors) {
  std::vector<LtSymbol> out;
  out.reserve(neighbors.size());
  for (std::size_t s = 0; s < neighbors.size(); ++s) {
    auto& nb = neighbors[s];
    std::sort(nb.begin(), nb.end());
    if (nb.empty()) throw std::invalid_argument("LT symbol with no neighbors");
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) {
      throw std::invalid_argument("LT symbol has duplicate neighbors");
    }
    if (nb.back() >= A.rows()) throw std::invalid_argument("LT neighbor index out of range");
    LtSymbol sym;
    sym.id = static_cast<std::int64_t>(s);
    sym.value.assign(A.cols(), 0.0);
    for (std::uint32_t src : nb) {
      const auto row = A.row(src);
      for (std::size_t j = 0; j < row.size(); ++j) sym.value[j] += row[j];
    }
    sym.neighbors = std::move(nb);
    out.push_back(std::move(sym));
  }
  return out;
}

std::vector<LtSymbol> lt_encode(const DenseMatrix& A, std::size_t count, const LtCodeSpec& spec,
                                Rng& rng) {
  if (count < 1) throw std::invalid_argument("lt_encode: count must be >= 1");
  if (spec.k != A.rows()) {
    throw std::invalid_argument("lt_encode: spec.k = " + std::to_string(spec.k) +
                                " but matrix has " + std::to_string(A.rows()) + " rows");
  }
  std::vector<std::vector<std::uint32_t>> neighbors;
  neighbors.reserve(count);
  for (std::size_t s = 0; s < count; ++s) neighbors.push_back(draw_neighbors(spec, rng));
  return lt_encode_with_neighbors(A, std::move(neighbors));
}

PeelingDecoder::PeelingDecoder(std::size_t k, std::size_t width)
    : k_(k), width_(width), values_(k * width, 0.0), recovered_(k, 0), touching_(k) {
  if (k < 1) throw std::invalid_argument("PeelingDecoder: k must be >= 1");
}

std::span<const double> PeelingDecoder::value(std::size_t i) const {
  return {values_.data() + i * width_, width_};
}

std::vector<std::size_t> PeelingDecoder::unresolved() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k_; ++i) {
    if (!recovered_[i]) out.push_back(i);
  }
  return out;
}

bool PeelingDecoder::add(std::span<const std::uint32_t> neighbors, std::span<const double> value) {
  if (value.size() != width_) {
    throw std::invalid_argument("PeelingDecoder: symbol width " + std::to_string(value.size()) +
                                " != " + std::to_string(width_));
  }
  if (neighbors.empty()) throw std::invalid_argument("PeelingDecoder: symbol has no neighbors");
  ++received_;
  if (complete()) return true;

  const auto id = static_cast<std::uint32_t>(degree_.size());
  degree_.push_back(0);
  index_sum_.push_back(0);
  pending_values_.insert(pending_values_.end(), value.begin(), value.end());
  double* v = pending_values_.data() + static_cast<std::size_t>(id) * width_;

  for (std::uint32_t src : neighbors) {
    if (src >= k_) throw std::invalid_argument("PeelingDecoder: neighbor index out of range");
    if (recovered_[src]) {
      const double* known = values_.data() + static_cast<std::size_t>(src) * width_;
      for (std::size_t j = 0; j < width_; ++j) v[j] -= known[j];
      ++substitutions_;
    } else {
      ++degree_[id];
      index_sum_[id] += src;
      touching_[src].push_back(id);
    }
  }
  if (degree_[id] == 1) {
    ripple_.push_back(id);
    drain_ripple();
  }
  return complete();
}

void PeelingDecoder::drain_ripple() {
  while (!ripple_.empty()) {
    const std::uint32_t sym = ripple_.back();
    ripple_.pop_back();
    if (degree_[sym] != 1) continue;
    const auto src = static_cast<std::size_t>(index_sum_[sym]);
    degree_[sym] = 0;
    const double* v = pending_values_.data() + static_cast<std::size_t>(sym) * width_;
    double* dst = values_.data() + src * width_;
    std::copy(v, v + width_, dst);
    recovered_[src] = 1;
    ++recovered_count_;

    for (std::uint32_t other : touching_[src]) {
      if (other == sym || degree_[other] == 0) continue;
      double* ov = pending_values_.data() + static_cast<std::size_t>(other) * width_;
      for (std::size_t j = 0; j < width_; ++j) ov[j] -= dst[j];
      ++substitutions_;
      --degree_[other];
      index_sum_[other] -= src;
      if (degree_[other] == 1) ripple_.push_back(other);
    }
    touching_[src].clear();
    touching_[src].shrink_to_fit();
  }
}

PeelResult lt_decode_peel(std::span<const LtSymbol> symbols, std::size_t k) {
  if (symbols.empty()) throw std::invalid_argument("lt_decode_peel: no symbols");
  PeelingDecoder dec(k, symbols.front().value.size());
  for (const auto& s : symbols) {
    if (dec.add(s)) break;
  }
  PeelResult out;
  out.success = dec.complete();
  out.recovered = dec.recovered_count();
  out.substitutions = dec.substitutions();
  out.values = dec.values();
  out.recovered_mask.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.recovered_mask[i] = dec.recovered(i);
  out.unresolved = dec.unresolved();
  return out;
}

namespace {

// Symbols consumed until the structure-only peeler completes; -1 on failure.
std::int64_t symbols_until_decoded(const LtCodeSpec& spec, Rng& rng, std::int64_t cap) {
  PeelingDecoder dec(spec.k, 0);
  for (std::int64_t n = 1; n <= cap; ++n) {
    const auto nb = draw_neighbors(spec, rng);
    if (dec.add(nb, {})) return n;
  }
  return -1;
}

}  // namespace

OverheadEstimate lt_required_overhead(const LtCodeSpec& spec, std::int64_t trials,
                                      const Rng& root, std::int64_t max_symbols) {
  if (trials < 1) throw std::invalid_argument("lt_required_overhead: trials must be >= 1");
  const std::int64_t cap =
      max_symbols > 0 ? max_symbols : 10 * static_cast<std::int64_t>(spec.k) + 100;
  std::vector<std::int64_t> needed;
  OverheadEstimate est;
  est.trials = trials;
  double sum = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = root.substream(static_cast<std::uint64_t>(t));
    const auto n = symbols_until_decoded(spec, rng, cap);
    if (n < 0) {
      ++est.failures;
      needed.push_back(cap + 1);
    } else {
      sum += static_cast<double>(n);
      needed.push_back(n);
    }
  }
  const auto successes = trials - est.failures;
  est.mean_symbols = successes > 0 ? sum / static_cast<double>(successes) : 0.0;
  std::sort(needed.begin(), needed.end());
  const double q = 1.0 - spec.delta;
  auto idx = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(trials) - 1e-9)) - 1;
  idx = std::clamp<std::int64_t>(idx, 0, trials - 1);
  est.quantile_symbols = needed[static_cast<std::size_t>(idx)];
  return est;
}

double lt_success_rate(const LtCodeSpec& spec, std::int64_t symbols, std::int64_t trials,
                       const Rng& root) {
  if (trials < 1) throw std::invalid_argument("lt_success_rate: trials must be >= 1");
  std::int64_t ok = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = root.substream(static_cast<std::uint64_t>(t));
    if (symbols_until_decoded(spec, rng, symbols) > 0) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(trials);
}

double measure_peel_seconds(const LtCodeSpec& spec, std::int64_t symbols, Rng& rng) {
  std::vector<std::vector<std::uint32_t>> nb;
  std::vector<double> vals;
  nb.reserve(static_cast<std::size_t>(symbols));
  for (std::int64_t s = 0; s < symbols; ++s) {
    nb.push_back(draw_neighbors(spec, rng));
    vals.push_back(rng.uniform());
  }
  const auto start = std::chrono::steady_clock::now();
  PeelingDecoder dec(spec.k, 1);
  for (std::size_t s = 0; s < nb.size(); ++s) {
    if (dec.add(nb[s], std::span<const double>(&vals[s], 1))) break;
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace hcmm
