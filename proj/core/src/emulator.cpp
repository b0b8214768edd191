#include "hcmm/emulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <future>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stop_token>
#include <thread>

namespace hcmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct WorkerTask {
  std::size_t worker = 0;
  DenseMatrix rows;             // what the worker multiplies with x
  std::int64_t first_symbol = 0;
  bool straggler = false;
  Rng runtime_rng{0};
};

// Worker-side virtual run time: sampled compute time, scaled for stragglers.
double worker_virtual_time(const JobSpec& spec, WorkerTask& task) {
  const auto& model = spec.cluster.workers[task.worker].model;
  const double t = sample_runtime(model, spec.loads[task.worker], task.runtime_rng);
  return task.straggler ? t * spec.straggler.slowdown : t;
}

std::vector<double> compute_products(const WorkerTask& task, std::span<const double> x,
                                     double& compute_s) {
  const auto start = Clock::now();
  auto y = task.rows.multiply(x);
  compute_s = seconds_since(start);
  return y;
}

// Master-side decoding state.
class Collector {
 public:
  virtual ~Collector() = default;
  // Consumes one worker's products; true once the output is decodable.
  virtual bool feed(const WorkerTask& task, std::span<const double> values) = 0;
  virtual std::vector<double> decode() = 0;
  std::int64_t symbols_used() const { return symbols_used_; }
  double decode_seconds() const { return decode_s_; }

 protected:
  std::int64_t symbols_used_ = 0;
  double decode_s_ = 0.0;
};

class UncodedCollector final : public Collector {
 public:
  explicit UncodedCollector(std::size_t r) : y_(r, 0.0) {}

  bool feed(const WorkerTask& task, std::span<const double> values) override {
    const auto start = static_cast<std::size_t>(task.first_symbol);
    std::copy(values.begin(), values.end(), y_.begin() + static_cast<std::ptrdiff_t>(start));
    covered_ += values.size();
    symbols_used_ += static_cast<std::int64_t>(values.size());
    return covered_ == y_.size();
  }
  std::vector<double> decode() override { return y_; }

 private:
  std::vector<double> y_;
  std::size_t covered_ = 0;
};

class RlcCollector final : public Collector {
 public:
  RlcCollector(std::size_t r, const std::vector<RlcBlock>& blocks)
      : r_(r), blocks_(blocks), received_(r, r) {
    z_.reserve(r);
  }

  bool feed(const WorkerTask& task, std::span<const double> values) override {
    const auto& coding = blocks_[task.worker].coding;
    for (std::size_t j = 0; j < values.size() && have_ < r_; ++j) {
      const auto src = coding.row(j);
      std::copy(src.begin(), src.end(), received_.row(have_).begin());
      z_.push_back(values[j]);
      ++have_;
      ++symbols_used_;
    }
    return have_ == r_;
  }
  std::vector<double> decode() override {
    const auto start = Clock::now();
    auto y = rlc_decode(received_, z_);
    decode_s_ += seconds_since(start);
    return y;
  }

 private:
  std::size_t r_;
  const std::vector<RlcBlock>& blocks_;
  DenseMatrix received_;
  std::vector<double> z_;
  std::size_t have_ = 0;
};

class LtCollector final : public Collector {
 public:
  LtCollector(std::size_t k, const std::vector<LtSymbol>& symbols)
      : symbols_(symbols), decoder_(k, 1) {}

  bool feed(const WorkerTask& task, std::span<const double> values) override {
    const auto start = Clock::now();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const auto& sym = symbols_[static_cast<std::size_t>(task.first_symbol) + j];
      ++symbols_used_;
      if (decoder_.add(sym.neighbors, values.subspan(j, 1))) break;
    }
    decode_s_ += seconds_since(start);
    return decoder_.complete();
  }
  std::vector<double> decode() override { return decoder_.values(); }

 private:
  const std::vector<LtSymbol>& symbols_;
  PeelingDecoder decoder_;
};

struct Message {
  enum class Kind { Announce, Result, Failure } kind = Kind::Announce;
  std::size_t worker = 0;
  double finish_time = 0.0;
  std::vector<double> values;
  double compute_s = 0.0;
  std::exception_ptr error;
};

class Channel {
 public:
  void push(Message m) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(m));
    }
    cv_.notify_one();
  }
  Message pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
};

std::vector<std::size_t> commit_order(const std::vector<double>& times,
                                      const std::vector<std::int64_t>& loads) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (loads[i] > 0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b] || (times[a] == times[b] && a < b);
  });
  return order;
}

}  // namespace

std::string to_string(CodingMode mode) {
  switch (mode) {
    case CodingMode::Uncoded: return "uncoded";
    case CodingMode::Rlc: return "rlc";
    case CodingMode::Lt: return "lt";
  }
  return "unknown";
}

void JobSpec::validate() const {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("job: empty matrix");
  if (x.size() != A.cols()) {
    throw std::invalid_argument("job: x has " + std::to_string(x.size()) + " entries, matrix has " +
                                std::to_string(A.cols()) + " columns");
  }
  cluster.validate();
  if (loads.size() != cluster.size()) {
    throw std::invalid_argument("job: allocation covers " + std::to_string(loads.size()) +
                                " workers, cluster has " + std::to_string(cluster.size()));
  }
  straggler.validate();
  const auto total = std::accumulate(loads.begin(), loads.end(), std::int64_t{0});
  if (std::any_of(loads.begin(), loads.end(), [](auto l) { return l < 0; })) {
    throw std::invalid_argument("job: negative load");
  }
  if (coding != CodingMode::Lt && total < static_cast<std::int64_t>(A.rows())) {
    throw std::invalid_argument("job: total load " + std::to_string(total) +
                                " cannot cover r = " + std::to_string(A.rows()));
  }
  if (coding == CodingMode::Lt) {
    if (!lt) throw std::invalid_argument("job: LT coding requires an LT code spec");
    if (lt->k != A.rows()) throw std::invalid_argument("job: LT spec k must equal matrix rows");
  }
}

bool JobMetrics::verified(double tolerance) const {
  return decoded && std::isfinite(max_abs_error) && max_abs_error <= tolerance * reference_norm;
}

bool JobMetrics::same_outcome(const JobMetrics& o) const {
  return decoded == o.decoded && wait_time == o.wait_time && rows_received == o.rows_received &&
         symbols_used == o.symbols_used && decode_threshold == o.decode_threshold &&
         max_abs_error == o.max_abs_error && reference_norm == o.reference_norm &&
         worker_times == o.worker_times && stragglers == o.stragglers;
}

std::vector<bool> inject_stragglers(std::size_t worker_count, const StragglerModel& straggler,
                                    Rng& rng) {
  straggler.validate();
  if (worker_count < 1) throw std::invalid_argument("inject_stragglers: need at least one worker");
  std::vector<bool> mask(worker_count);
  for (std::size_t i = 0; i < worker_count; ++i) mask[i] = rng.bernoulli(straggler.p);
  return mask;
}

double verify(std::span<const double> result, std::span<const double> reference) {
  if (result.size() != reference.size()) {
    throw std::invalid_argument("verify: result has " + std::to_string(result.size()) +
                                " entries, reference has " + std::to_string(reference.size()));
  }
  double err = 0.0;
  for (std::size_t i = 0; i < result.size(); ++i) {
    const double d = std::abs(result[i] - reference[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    err = std::max(err, d);
  }
  return err;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

std::vector<double> gaussian_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& e : v) e = rng.normal();
  return v;
}

DenseMatrix integer_matrix(std::size_t rows, std::size_t cols, Rng& rng, int bound) {
  if (bound < 1) throw std::invalid_argument("integer_matrix: bound must be >= 1");
  DenseMatrix m(rows, cols);
  const auto span = static_cast<std::uint64_t>(2 * bound + 1);
  for (double& v : m.data()) v = static_cast<double>(static_cast<std::int64_t>(rng.below(span)) - bound);
  return m;
}

std::vector<double> integer_vector(std::size_t n, Rng& rng, int bound) {
  const auto m = integer_matrix(1, n, rng, bound);
  return {m.data().begin(), m.data().end()};
}

JobResult run_job(const JobSpec& spec) {
  spec.validate();
  const std::size_t n = spec.cluster.size();
  const std::size_t r = spec.A.rows();
  const Rng master(spec.seed);

  JobResult result;
  JobMetrics& metrics = result.metrics;
  result.reference = spec.A.multiply(spec.x);
  metrics.reference_norm = max_abs(result.reference);

  Rng straggler_rng = master.substream(1);
  metrics.stragglers = inject_stragglers(n, spec.straggler, straggler_rng);

  // Encode and cut the coded rows into per-worker tasks.
  std::vector<WorkerTask> tasks(n);
  std::vector<RlcBlock> rlc_blocks;
  std::vector<LtSymbol> lt_symbols;
  std::unique_ptr<Collector> collector;
  Rng encode_rng = master.substream(0);
  const Rng runtime_root = master.substream(2);
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tasks[i].worker = i;
    tasks[i].straggler = metrics.stragglers[i];
    tasks[i].runtime_rng = runtime_root.substream(i);
    tasks[i].first_symbol = offset;
    offset += spec.loads[i];
  }

  switch (spec.coding) {
    case CodingMode::Uncoded: {
      for (std::size_t i = 0; i < n; ++i) {
        const auto begin = std::min<std::int64_t>(tasks[i].first_symbol, static_cast<std::int64_t>(r));
        const auto end = std::min<std::int64_t>(begin + spec.loads[i], static_cast<std::int64_t>(r));
        DenseMatrix rows(static_cast<std::size_t>(end - begin), spec.A.cols());
        for (auto row = begin; row < end; ++row) {
          const auto src = spec.A.row(static_cast<std::size_t>(row));
          std::copy(src.begin(), src.end(), rows.row(static_cast<std::size_t>(row - begin)).begin());
        }
        tasks[i].rows = std::move(rows);
        tasks[i].first_symbol = begin;
      }
      metrics.decode_threshold = static_cast<std::int64_t>(r);
      collector = std::make_unique<UncodedCollector>(r);
      break;
    }
    case CodingMode::Rlc: {
      rlc_blocks = spec.rlc_coding ? rlc_encode_with(spec.A, *spec.rlc_coding)
                                   : rlc_encode(spec.A, spec.loads, encode_rng);
      for (std::size_t i = 0; i < n; ++i) tasks[i].rows = rlc_blocks[i].coded;
      metrics.decode_threshold = static_cast<std::int64_t>(r);
      collector = std::make_unique<RlcCollector>(r, rlc_blocks);
      break;
    }
    case CodingMode::Lt: {
      lt_symbols = lt_encode(spec.A, static_cast<std::size_t>(offset), *spec.lt, encode_rng);
      for (std::size_t i = 0; i < n; ++i) {
        DenseMatrix rows(static_cast<std::size_t>(spec.loads[i]), spec.A.cols());
        for (std::int64_t j = 0; j < spec.loads[i]; ++j) {
          const auto& v = lt_symbols[static_cast<std::size_t>(tasks[i].first_symbol + j)].value;
          std::copy(v.begin(), v.end(), rows.row(static_cast<std::size_t>(j)).begin());
        }
        tasks[i].rows = std::move(rows);
      }
      metrics.decode_threshold = 0;
      collector = std::make_unique<LtCollector>(r, lt_symbols);
      break;
    }
  }

  metrics.worker_times.assign(n, std::numeric_limits<double>::infinity());
  metrics.worker_compute_s.assign(n, 0.0);

  auto commit = [&](std::size_t w, std::span<const double> values) {
    metrics.rows_received += spec.loads[w];
    if (collector->feed(tasks[w], values)) {
      metrics.decoded = true;
      metrics.wait_time = metrics.worker_times[w];
    }
  };

  const auto start = Clock::now();
  if (spec.mode == ExecutionMode::Virtual) {
    for (std::size_t i = 0; i < n; ++i) {
      if (spec.loads[i] > 0) metrics.worker_times[i] = worker_virtual_time(spec, tasks[i]);
    }
    for (std::size_t w : commit_order(metrics.worker_times, spec.loads)) {
      const auto values = compute_products(tasks[w], spec.x, metrics.worker_compute_s[w]);
      commit(w, values);
      if (metrics.decoded) break;
    }
  } else {
    Channel to_master;
    std::vector<std::promise<void>> broadcast(n);
    std::vector<std::size_t> loaded;
    for (std::size_t i = 0; i < n; ++i) {
      if (spec.loads[i] > 0) loaded.push_back(i);
    }
    {
      std::vector<std::jthread> workers;
      workers.reserve(loaded.size());
      for (std::size_t w : loaded) {
        auto ready = broadcast[w].get_future();
        workers.emplace_back([&, w, ready = std::move(ready)](std::stop_token stop) mutable {
          try {
            ready.wait();  // Broadcast(x)
            Message announce;
            announce.kind = Message::Kind::Announce;
            announce.worker = w;
            announce.finish_time = worker_virtual_time(spec, tasks[w]);
            to_master.push(std::move(announce));
            if (stop.stop_requested()) return;

            Message res;
            res.kind = Message::Kind::Result;
            res.worker = w;
            res.values = compute_products(tasks[w], spec.x, res.compute_s);
            if (spec.real_delays && tasks[w].straggler && spec.straggler.slowdown > 1.0) {
              std::mutex m;
              std::condition_variable_any cv;
              std::unique_lock lock(m);
              const auto pause = std::chrono::duration<double>((spec.straggler.slowdown - 1.0) *
                                                               res.compute_s);
              cv.wait_for(lock, stop, pause, [] { return false; });
            }
            to_master.push(std::move(res));
          } catch (...) {
            Message fail;
            fail.kind = Message::Kind::Failure;
            fail.worker = w;
            fail.error = std::current_exception();
            to_master.push(std::move(fail));
          }
        });
      }
      for (std::size_t w : loaded) broadcast[w].set_value();

      std::vector<std::optional<std::vector<double>>> pending(n);
      std::size_t announced = 0;
      std::vector<std::size_t> order;
      std::size_t next = 0;
      std::exception_ptr failure;
      while (!metrics.decoded && !failure && (order.empty() || next < order.size())) {
        Message m = to_master.pop();
        switch (m.kind) {
          case Message::Kind::Announce:
            metrics.worker_times[m.worker] = m.finish_time;
            if (++announced == loaded.size()) order = commit_order(metrics.worker_times, spec.loads);
            break;
          case Message::Kind::Result:
            metrics.worker_compute_s[m.worker] = m.compute_s;
            pending[m.worker] = std::move(m.values);
            break;
          case Message::Kind::Failure:
            failure = m.error;
            break;
        }
        while (!order.empty() && next < order.size() && pending[order[next]] && !metrics.decoded) {
          const std::size_t w = order[next++];
          commit(w, *pending[w]);
          pending[w].reset();
        }
      }
      for (auto& t : workers) t.request_stop();  // Done
      if (failure) std::rethrow_exception(failure);
    }
  }

  if (metrics.decoded) {
    result.y = collector->decode();
    if (spec.corrupt_result != 0.0 && !result.y.empty()) result.y[0] += spec.corrupt_result;
    metrics.max_abs_error = verify(result.y, result.reference);
  } else {
    metrics.max_abs_error = std::numeric_limits<double>::infinity();
  }
  metrics.wall_wait_s = seconds_since(start);
  metrics.symbols_used = collector->symbols_used();
  metrics.decode_s = collector->decode_seconds();
  return result;
}

std::string job_metrics_csv_header() {
  return "decoded,wait_time_s,rows_received,symbols_used,decode_threshold,max_abs_error,"
         "relative_error,wall_wait_s,decode_s";
}

std::string to_csv_row(const JobMetrics& m) {
  std::ostringstream os;
  os.precision(10);
  os << (m.decoded ? 1 : 0) << ',' << m.wait_time << ',' << m.rows_received << ','
     << m.symbols_used << ',' << m.decode_threshold << ',' << m.max_abs_error << ','
     << m.relative_error() << ',' << m.wall_wait_s << ',' << m.decode_s;
  return os.str();
}

}  // namespace hcmm
