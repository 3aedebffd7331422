#include "sbd/distsim.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>

#include "sbd/errors.hpp"

namespace sbd {

using Clock = std::chrono::steady_clock;

namespace {

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

Partition make_partition(std::uint32_t n_alpha, int workers) {
  if (workers < 1) throw ContractError("partition: worker count must be >= 1");
  if (static_cast<std::uint32_t>(workers) > n_alpha)
    throw ContractError("partition: " + std::to_string(workers) + " workers exceed " +
                        std::to_string(n_alpha) + " alpha strings");
  Partition p;
  p.workers = workers;
  const std::uint32_t base = n_alpha / static_cast<std::uint32_t>(workers);
  const std::uint32_t extra = n_alpha % static_cast<std::uint32_t>(workers);
  std::uint32_t begin = 0;
  for (int w = 0; w < workers; ++w) {
    const std::uint32_t len = base + (static_cast<std::uint32_t>(w) < extra ? 1 : 0);
    p.blocks.push_back({begin, begin + len});
    begin += len;
  }
  return p;
}

void RingChannel::send(RingMessage msg) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return queue_.size() < capacity_; });
  queue_.push_back(std::move(msg));
  cv_.notify_all();
}

RingMessage RingChannel::receive() {
  RingMessage msg;
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    msg = std::move(queue_.front());
    queue_.pop_front();
    cv_.notify_all();
  }
  std::this_thread::sleep_until(msg.available_at);
  return msg;
}

OverlapReport overlap_stats(const DistRun& run) {
  OverlapReport rep;
  double ratio_sum = 0.0;
  for (std::size_t w = 0; w < run.per_worker.size(); ++w) {
    for (const StepStats& s : run.per_worker[w].steps) {
      StepOverlap o;
      o.worker = static_cast<int>(w);
      o.step = s.step;
      o.compute_seconds = s.compute_seconds;
      o.transfer_seconds = s.transfer_seconds;
      o.exposed_seconds = s.exposed_seconds;
      o.overlap_ratio = (!s.transferred || s.transfer_seconds == 0.0 || s.step_seconds <= 0.0)
                            ? 1.0
                            : 1.0 - s.exposed_seconds / s.step_seconds;
      rep.max_exposed_seconds = std::max(rep.max_exposed_seconds, o.exposed_seconds);
      ratio_sum += o.overlap_ratio;
      rep.steps.push_back(o);
    }
  }
  if (!rep.steps.empty()) rep.mean_overlap_ratio = ratio_sum / static_cast<double>(rep.steps.size());
  return rep;
}

// ----------------------------------------------------------------------------

struct DistributedHamiltonian::Worker {
  IndexWindow bra;
  DetCache cache;
  std::vector<double> diag;
  std::shared_ptr<RingBuffer> current = std::make_shared<RingBuffer>();
  std::shared_ptr<RingBuffer> alternate = std::make_shared<RingBuffer>();
  std::vector<double> y;
  std::atomic<std::size_t> conflicts{0};
  WorkerRun run;
};

namespace {

IndexWindow block_window(const Partition& p, int block, std::uint32_t nb) {
  return {p.blocks[static_cast<std::size_t>(block)].begin,
          p.blocks[static_cast<std::size_t>(block)].end, 0, nb};
}

// Flags a buffer for one role; any other role already holding it is a conflict.
void acquire(RingBuffer& b, int role, std::atomic<std::size_t>& conflicts) {
  int expected = RingBuffer::Idle;
  if (!b.state.compare_exchange_strong(expected, role)) {
    conflicts.fetch_add(1);
    b.state.store(role);
  }
}

void release(RingBuffer& b) { b.state.store(RingBuffer::Idle); }

}  // namespace

DistributedHamiltonian::DistributedHamiltonian(const SelectedBasis& basis,
                                               const IntegralTable& table,
                                               const SpinTables& tables, Partition partition,
                                               DistOptions opts)
    : basis_(&basis), table_(&table), tables_(&tables), partition_(std::move(partition)),
      opts_(opts) {
  if (basis.mode() != BasisMode::Product)
    throw ContractError("distributed apply requires a product basis");
  const auto na = static_cast<std::uint32_t>(basis.alpha_strings().size());
  if (partition_.workers < 1 || partition_.blocks.size() != static_cast<std::size_t>(partition_.workers) ||
      partition_.blocks.front().begin != 0 || partition_.blocks.back().end != na)
    throw ContractError("partition does not cover the alpha strings of the basis");
  for (std::size_t w = 1; w < partition_.blocks.size(); ++w)
    if (partition_.blocks[w].begin != partition_.blocks[w - 1].end)
      throw ContractError("partition blocks are not contiguous");
  const auto nb = static_cast<std::uint32_t>(basis.beta_strings().size());
  for (int w = 0; w < partition_.workers; ++w) {
    auto wk = std::make_unique<Worker>();
    wk->bra = block_window(partition_, w, nb);
    wk->cache.ensure(basis, wk->bra, wk->bra);
    wk->diag = compute_diagonal(basis, table, wk->cache);
    workers_.push_back(std::move(wk));
    inbox_.push_back(std::make_unique<RingChannel>(1));
  }
}

DistributedHamiltonian::~DistributedHamiltonian() = default;

const DetCache& DistributedHamiltonian::worker_cache(int w) const {
  if (w < 0 || w >= partition_.workers) throw RangeError("worker index out of range");
  return workers_[static_cast<std::size_t>(w)]->cache;
}

std::vector<double> DistributedHamiltonian::diagonal() const {
  std::vector<double> d;
  d.reserve(basis_->dimension());
  for (const auto& wk : workers_) d.insert(d.end(), wk->diag.begin(), wk->diag.end());
  return d;
}

std::vector<double> DistributedHamiltonian::apply(std::span<const double> x) {
  std::vector<double> y(x.size());
  apply(x, y);
  return y;
}

void DistributedHamiltonian::apply(std::span<const double> x, std::span<double> y) {
  if (x.size() != basis_->dimension() || y.size() != basis_->dimension())
    throw ContractError("distributed apply: dimension mismatch");
  const int p = partition_.workers;
  last_run_ = DistRun{};
  last_run_.workers = p;
  last_run_.overlap = opts_.overlap;
  last_run_.transfer_delay_seconds = opts_.transfer_delay.count();

  std::barrier<> sync(p);
  const auto t0 = Clock::now();
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < p; ++w)
      threads.emplace_back([&, w] {
        // Inputs are validated up front; a throw here would strand peers at the barrier.
        try {
          run_worker(w, x, y, sync);
        } catch (...) {
          std::terminate();
        }
      });
  }
  last_run_.wall_seconds = seconds_between(t0, Clock::now());
  for (auto& wk : workers_) last_run_.per_worker.push_back(std::move(wk->run));
}

void DistributedHamiltonian::run_worker(int w, std::span<const double> x, std::span<double> y,
                                        std::barrier<>& sync) {
  Worker& wk = *workers_[static_cast<std::size_t>(w)];
  const int p = partition_.workers;
  const auto nb = static_cast<std::uint32_t>(basis_->beta_strings().size());
  const ExecConfig exec{opts_.policy, opts_.threads_per_worker};
  wk.run = WorkerRun{};
  wk.conflicts.store(0);
  const std::size_t rebuilds_before = wk.cache.rebuild_count();

  // Each worker starts from its own slab of x.
  const std::size_t row0 = static_cast<std::size_t>(wk.bra.alpha_begin) * nb;
  wk.current->data.assign(x.begin() + static_cast<std::ptrdiff_t>(row0),
                          x.begin() + static_cast<std::ptrdiff_t>(row0 + wk.bra.area()));
  wk.current->block = w;
  wk.y.assign(wk.bra.area(), 0.0);

  RingChannel& outbox = *inbox_[static_cast<std::size_t>(partition_.next(w))];
  RingChannel& inbox = *inbox_[static_cast<std::size_t>(w)];

  auto receive_into_alternate = [&]() {
    RingMessage msg = inbox.receive();
    acquire(*wk.alternate, RingBuffer::Receiving, wk.conflicts);
    wk.alternate->data.assign(msg.payload->data.begin(), msg.payload->data.end());
    wk.alternate->block = msg.block;
    release(*wk.alternate);
    return msg.sent_at;
  };

  for (int s = 0; s < p; ++s) {
    StepStats st;
    st.step = s;
    st.block = wk.current->block;
    st.transferred = s + 1 < p;
    wk.run.visit_sequence.push_back(st.block);
    if (st.block != partition_.block_at_step(w, s))
      throw ContractError("ring order violated at worker " + std::to_string(w));

    const IndexWindow ket = block_window(partition_, st.block, nb);
    st.cache_rebuilt = wk.cache.ensure(*basis_, wk.bra, ket);

    const auto step_start = Clock::now();
    std::jthread receiver;
    Clock::time_point sent_at{}, received_at{}, own_send_done{};
    const auto delay = std::chrono::duration_cast<Clock::duration>(opts_.transfer_delay);
    if (st.transferred && opts_.overlap) {
      const auto now = Clock::now();
      own_send_done = now + delay;
      outbox.send({wk.current, st.block, now, own_send_done});
      receiver = std::jthread([&] {
        sent_at = receive_into_alternate();
        received_at = Clock::now();
      });
    }

    acquire(*wk.current, RingBuffer::ComputeReading, wk.conflicts);
    accumulate_block(*basis_, *table_, *tables_, wk.cache, wk.diag, wk.current->data, wk.y, exec);
    release(*wk.current);
    const auto compute_end = Clock::now();
    st.compute_seconds = seconds_between(step_start, compute_end);

    if (st.transferred) {
      if (opts_.overlap) {
        receiver.join();
      } else {
        const auto now = Clock::now();
        own_send_done = now + delay;
        outbox.send({wk.current, st.block, now, own_send_done});
        sent_at = receive_into_alternate();
        received_at = Clock::now();
      }
      // The outgoing block occupies the link until its own delivery time.
      std::this_thread::sleep_until(own_send_done);
      const auto exchange_end = Clock::now();
      st.exposed_seconds = seconds_between(compute_end, exchange_end);
      st.transfer_seconds = seconds_between(sent_at, received_at);
      if (!opts_.overlap) st.transfer_seconds = st.exposed_seconds;
    }
    st.step_seconds = st.compute_seconds + st.exposed_seconds;
    wk.run.steps.push_back(st);

    // Nobody may swap while a peer still copies out of our current buffer.
    sync.arrive_and_wait();
    if (st.transferred) std::swap(wk.current, wk.alternate);
  }

  std::copy(wk.y.begin(), wk.y.end(), y.begin() + static_cast<std::ptrdiff_t>(row0));
  wk.run.cache_rebuilds = wk.cache.rebuild_count() - rebuilds_before;
  wk.run.buffer_conflicts = wk.conflicts.load();
}

std::vector<double> distributed_apply_H(std::span<const double> x, const SelectedBasis& basis,
                                        const IntegralTable& table, const SpinTables& tables,
                                        const Partition& partition, const DistOptions& opts,
                                        DistRun* run) {
  DistributedHamiltonian h(basis, table, tables, partition, opts);
  std::vector<double> y = h.apply(x);
  if (run) *run = h.last_run();
  return y;
}

}  // namespace sbd
