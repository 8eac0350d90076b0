#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "eoq/error.hpp"
#include "eoq/game.hpp"
#include "eoq/rng.hpp"
#include "parallel.hpp"

namespace eoq {
namespace {

constexpr std::size_t kExactChunks = 64;
constexpr std::uint64_t kPermutationsPerChunk = 1024;

// Running mean and sum of squared deviations (Welford); merged with Chan's
// pairwise update.
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }
};

}  // namespace

Allocation shapley_exact(const CostGame& g, std::size_t exact_threshold, unsigned threads) {
  const std::size_t n = g.size();
  if (n > exact_threshold) {
    throw LimitError(fmt::format("exact Shapley value needs 2^{} coalitions; threshold is {}", n,
                                 exact_threshold));
  }
  if (n > 40) throw LimitError("exact Shapley value supports at most 40 players");

  Allocation out;
  out.players = g.players();
  out.values.assign(n, 0.0);
  out.total = g.grand_cost();
  if (n == 0) return out;

  // weight[k] = k! (n-k-1)! / n!, the probability that a given player finds
  // exactly a given k-coalition ahead of it.
  std::vector<double> weight(n);
  weight[0] = 1.0 / static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    weight[k] = weight[k - 1] * static_cast<double>(k) / static_cast<double>(n - k);
  }

  // Each coalition M is priced once: members gain weight[|M|-1] * c(M),
  // outsiders lose weight[|M|] * c(M).
  const std::size_t low_bits = n / 2;
  const std::size_t high_bits = n - low_bits;
  auto half_table = [&](std::size_t offset, std::size_t bits) {
    std::vector<Aggregate> t(std::size_t{1} << bits);
    for (std::size_t m = 1; m < t.size(); ++m) {
      t[m] = t[m & (m - 1)] + g.aggregates()[offset + std::countr_zero(m)];
    }
    return t;
  };
  const auto low = half_table(0, low_bits);
  const auto high = half_table(low_bits, high_bits);
  const Coalition low_mask = (Coalition{1} << low_bits) - 1;

  const Coalition end = Coalition{1} << n;
  const std::size_t chunks = std::min<std::size_t>(kExactChunks, end);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(n, 0.0));
  detail::for_each_chunk(chunks, threads, [&](std::size_t c) {
    const Coalition first = end / chunks * c + std::min<Coalition>(c, end % chunks);
    const Coalition last = first + end / chunks + (c < end % chunks ? 1 : 0);
    auto& acc = partial[c];
    for (Coalition m = std::max<Coalition>(first, 1); m < last; ++m) {
      const double cost = g.cost_of(low[m & low_mask] + high[m >> low_bits]);
      const auto k = static_cast<std::size_t>(std::popcount(m));
      const double gain = weight[k - 1] * cost;
      const double loss = k < n ? weight[k] * cost : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc[i] += (m >> i & 1U) ? gain : -loss;
      }
    }
  });
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < n; ++i) out.values[i] += acc[i];
  }
  return out;
}

SampledShapley shapley_sampled(const CostGame& g, const SamplingConfig& cfg) {
  if (cfg.sample_count < 1) throw ValidationError("sample count must be at least 1");
  const std::size_t n = g.size();

  SampledShapley out;
  out.allocation.players = g.players();
  out.allocation.total = g.grand_cost();
  out.allocation.values.assign(n, 0.0);
  out.std_errors.assign(n, 0.0);
  if (n == 0) return out;

  const std::uint64_t chunks = (cfg.sample_count + kPermutationsPerChunk - 1) / kPermutationsPerChunk;
  std::vector<std::vector<Moments>> partial(chunks, std::vector<Moments>(n));
  detail::for_each_chunk(chunks, cfg.threads, [&](std::size_t c) {
    Rng rng(cfg.seed, c);
    const std::uint64_t begin = c * kPermutationsPerChunk;
    const std::uint64_t count = std::min(kPermutationsPerChunk, cfg.sample_count - begin);
    std::vector<std::size_t> order(n);
    auto& acc = partial[c];
    for (std::uint64_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      rng.shuffle(order.begin(), order.end());
      Aggregate running;
      double previous = 0.0;
      for (std::size_t player : order) {
        running += g.aggregates()[player];
        const double current = g.cost_of(running);
        acc[player].add(current - previous);
        previous = current;
      }
    }
  });

  std::vector<Moments> total(n);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < n; ++i) total[i].merge(acc[i]);
  }
  double raw_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) raw_sum += total[i].mean;
  const double shift = (out.allocation.total - raw_sum) / static_cast<double>(n);
  const double samples = static_cast<double>(cfg.sample_count);
  for (std::size_t i = 0; i < n; ++i) {
    out.allocation.values[i] = total[i].mean + shift;
    out.std_errors[i] =
        cfg.sample_count > 1 ? std::sqrt(total[i].m2 / (samples - 1.0)) / std::sqrt(samples) : 0.0;
  }
  return out;
}

}  // namespace eoq
