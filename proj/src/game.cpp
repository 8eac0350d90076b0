#include "eoq/game.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "eoq/error.hpp"
#include "eoq/rng.hpp"

namespace eoq {
namespace {

std::vector<std::string> members_of(const CostGame& g, Coalition mask) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask >> i & 1U) out.push_back(g.players()[i]);
  }
  return out;
}

}  // namespace

CostGame::CostGame(std::vector<std::string> players, std::vector<Aggregate> aggregates,
                   double ordering_cost, double exemption_price, Aggregate background)
    : players_(std::move(players)),
      aggregates_(std::move(aggregates)),
      ordering_cost_(ordering_cost),
      exemption_price_(exemption_price),
      background_(background) {
  if (players_.size() != aggregates_.size()) {
    throw ValidationError("cost game: players and aggregates differ in length");
  }
  if (!(ordering_cost_ > 0.0) || !(exemption_price_ > 0.0)) {
    throw ValidationError("cost game: ordering cost and exemption price must be positive");
  }
  for (std::size_t i = 0; i < aggregates_.size(); ++i) {
    if (!(aggregates_[i].holding > 0.0) || !(aggregates_[i].acquisition > 0.0)) {
      throw ValidationError(fmt::format("cost game: player '{}' needs positive H and C", players_[i]));
    }
  }
  if (background_.holding < 0.0 || background_.acquisition < 0.0) {
    throw ValidationError("cost game: negative background aggregate");
  }
}

CostGame::CostGame(const CostGame& other)
    : players_(other.players_),
      aggregates_(other.aggregates_),
      ordering_cost_(other.ordering_cost_),
      exemption_price_(other.exemption_price_),
      background_(other.background_) {
  if (other.memo_) enable_memo();
}

CostGame& CostGame::operator=(const CostGame& other) {
  if (this != &other) {
    CostGame copy(other);
    *this = std::move(copy);
  }
  return *this;
}

CostGame CostGame::over_items(const Problem& p) {
  std::vector<std::string> ids;
  std::vector<Aggregate> aggs;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ids.push_back(p.items()[i].item_id);
    aggs.push_back(p.item_aggregate(i));
  }
  return {std::move(ids), std::move(aggs), p.ordering_cost(), p.exemption_price()};
}

CostGame CostGame::over_firms(const Problem& p) {
  std::vector<Aggregate> aggs;
  for (std::size_t k = 0; k < p.firms().size(); ++k) aggs.push_back(p.firm_aggregate(k));
  return {p.firms(), std::move(aggs), p.ordering_cost(), p.exemption_price()};
}

CostGame CostGame::within_firm(const Problem& p, std::size_t firm_index) {
  std::vector<std::string> ids;
  std::vector<Aggregate> aggs;
  for (std::size_t i : p.firm_members().at(firm_index)) {
    ids.push_back(p.items()[i].item_id);
    aggs.push_back(p.item_aggregate(i));
  }
  Aggregate others;
  for (std::size_t k = 0; k < p.firms().size(); ++k) {
    if (k != firm_index) others += p.firm_aggregate(k);
  }
  return {std::move(ids), std::move(aggs), p.ordering_cost(), p.exemption_price(), others};
}

Coalition CostGame::grand_coalition() const {
  if (size() > 64) throw LimitError("bitmask coalitions support at most 64 players");
  return size() == 64 ? ~Coalition{0} : (Coalition{1} << size()) - 1;
}

double CostGame::cost_of(const Aggregate& members_agg) const {
  if (members_agg.holding <= 0.0) return 0.0;
  return members_agg.holding * unit_rate(members_agg + background_, ordering_cost_, exemption_price_);
}

double CostGame::compute(Coalition members) const {
  Aggregate agg;
  for (Coalition m = members; m != 0; m &= m - 1) agg += aggregates_[std::countr_zero(m)];
  return cost_of(agg);
}

double CostGame::cost(Coalition members) const {
  if (size() > 64) throw LimitError("bitmask coalitions support at most 64 players");
  if (members == 0) return 0.0;
  if (!memo_) return compute(members);
  std::atomic<double>& slot = memo_[members];
  double v = slot.load(std::memory_order_relaxed);
  if (std::isnan(v)) {
    v = compute(members);
    slot.store(v, std::memory_order_relaxed);
  }
  return v;
}

double CostGame::cost(std::span<const std::size_t> members) const {
  Aggregate agg;
  std::vector<bool> seen(size(), false);
  for (std::size_t i : members) {
    if (i >= size()) throw ValidationError(fmt::format("player index {} out of range", i));
    if (seen[i]) continue;
    seen[i] = true;
    agg += aggregates_[i];
  }
  return cost_of(agg);
}

double CostGame::grand_cost() const {
  Aggregate agg;
  for (const auto& a : aggregates_) agg += a;
  return cost_of(agg);
}

void CostGame::enable_memo() {
  if (size() > kMemoLimit) {
    throw LimitError(fmt::format("memoization supports at most {} players", kMemoLimit));
  }
  if (memo_) return;
  const std::size_t slots = std::size_t{1} << size();
  memo_ = std::make_unique<std::atomic<double>[]>(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    memo_[i].store(std::numeric_limits<double>::quiet_NaN(), std::memory_order_relaxed);
  }
}

double Allocation::at(std::string_view player) const {
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i] == player) return values[i];
  }
  throw ValidationError(fmt::format("allocation has no player '{}'", player));
}

double Allocation::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

bool Allocation::efficient() const {
  return std::abs(sum() - total) <= 1e-6 * std::max(1.0, std::abs(total));
}

CoreVerdict core_check(const CostGame& g, const Allocation& x, double tol,
                       std::size_t enumeration_threshold) {
  const std::size_t n = g.size();
  if (n > enumeration_threshold) {
    throw LimitError(fmt::format("core check enumerates 2^{} coalitions; limit is {} players", n,
                                 enumeration_threshold));
  }
  if (x.values.size() != n || x.players != g.players()) {
    throw ValidationError("allocation players do not match the game");
  }
  if (!(tol >= 0.0)) throw ValidationError("tolerance must be nonnegative");
  const double grand = g.grand_cost();
  if (std::abs(x.total - grand) > tol || std::abs(x.sum() - grand) > tol) {
    throw ValidationError(fmt::format(
        "inefficient allocation: sums to {} (declared total {}) but c(N) = {}", x.sum(), x.total,
        grand));
  }

  // Split masks into a low and a high half so per-coalition sums take two
  // additions and no 2^n storage.
  const std::size_t low_bits = n / 2;
  const std::size_t high_bits = n - low_bits;
  struct Sums {
    Aggregate agg;
    double charged = 0.0;
  };
  auto half_table = [&](std::size_t offset, std::size_t bits) {
    std::vector<Sums> t(std::size_t{1} << bits);
    for (std::size_t m = 1; m < t.size(); ++m) {
      const std::size_t j = static_cast<std::size_t>(std::countr_zero(m));
      t[m] = t[m & (m - 1)];
      t[m].agg += g.aggregates()[offset + j];
      t[m].charged += x.values[offset + j];
    }
    return t;
  };
  const auto low = half_table(0, low_bits);
  const auto high = half_table(low_bits, high_bits);

  CoreVerdict verdict;
  const Coalition low_mask = (Coalition{1} << low_bits) - 1;
  const Coalition end = Coalition{1} << n;
  for (Coalition m = 1; m < end; ++m) {
    const Sums& l = low[m & low_mask];
    const Sums& h = high[m >> low_bits];
    const double charged = l.charged + h.charged;
    const double cost = g.cost_of(l.agg + h.agg);
    ++verdict.coalitions_checked;
    if (charged > cost + tol) {
      verdict.in_core = false;
      verdict.violations.push_back({members_of(g, m), charged - cost});
    }
  }
  return verdict;
}

SubadditivityVerdict subadditivity_check(const CostGame& g, std::uint64_t trials,
                                         std::uint64_t seed) {
  const std::size_t n = g.size();
  SubadditivityVerdict verdict;
  auto test_pair = [&](Coalition s, Coalition t, double cs, double ct, double cst) {
    ++verdict.pairs_checked;
    if (!(cst < cs + ct)) {
      verdict.strictly_subadditive = false;
      verdict.violations.push_back({members_of(g, s), members_of(g, t), cst, cs + ct});
    }
  };

  if (n < 2) {
    verdict.exhaustive = true;
    return verdict;
  }
  if (n <= kExhaustiveSubadditivityLimit) {
    verdict.exhaustive = true;
    std::vector<double> table(std::size_t{1} << n);
    for (Coalition m = 1; m < table.size(); ++m) table[m] = g.cost(m);
    for (Coalition u = 1; u < table.size(); ++u) {
      if (std::popcount(u) < 2) continue;
      const Coalition lowest = u & (~u + 1);
      const Coalition rest = u ^ lowest;
      // S always holds the lowest member of U, so each unordered pair is seen once.
      for (Coalition sub = rest;; sub = (sub - 1) & rest) {
        const Coalition s = lowest | sub;
        const Coalition t = u ^ s;
        if (t != 0) test_pair(s, t, table[s], table[t], table[u]);
        if (sub == 0) break;
      }
    }
    return verdict;
  }
  Rng rng(seed);
  std::vector<int> side(n);
  for (std::uint64_t k = 0; k < trials; ++k) {
    Aggregate s;
    Aggregate t;
    bool has_s = false;
    bool has_t = false;
    while (!has_s || !has_t) {
      s = t = {};
      has_s = has_t = false;
      for (std::size_t i = 0; i < n; ++i) {
        side[i] = static_cast<int>(rng.below(3));
        if (side[i] == 1) {
          s += g.aggregates()[i];
          has_s = true;
        } else if (side[i] == 2) {
          t += g.aggregates()[i];
          has_t = true;
        }
      }
    }
    const double cs = g.cost_of(s);
    const double ct = g.cost_of(t);
    const double cst = g.cost_of(s + t);
    ++verdict.pairs_checked;
    if (!(cst < cs + ct)) {
      verdict.strictly_subadditive = false;
      SubadditivityViolation v{{}, {}, cst, cs + ct};
      for (std::size_t i = 0; i < n; ++i) {
        if (side[i] == 1) v.first.push_back(g.players()[i]);
        if (side[i] == 2) v.second.push_back(g.players()[i]);
      }
      verdict.violations.push_back(std::move(v));
    }
  }
  return verdict;
}

std::vector<double> marginal_costs(const CostGame& g) {
  std::vector<double> out(g.size());
  Aggregate all;
  for (const auto& a : g.aggregates()) all += a;
  const double grand = g.cost_of(all);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Aggregate rest;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j != i) rest += g.aggregates()[j];
    }
    out[i] = grand - g.cost_of(rest);
  }
  return out;
}

bool id_less(std::string_view lhs, std::string_view rhs) {
  auto as_int = [](std::string_view s, unsigned long long& v) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  unsigned long long a = 0;
  unsigned long long b = 0;
  if (as_int(lhs, a) && as_int(rhs, b) && a != b) return a < b;
  return lhs < rhs;
}

DropSelection drop_selection(const Problem& p, const std::vector<std::vector<std::string>>& groups,
                             std::span<const double> measure, std::size_t drops_per_group) {
  if (measure.size() != p.size()) {
    throw ValidationError("drop selection: measure must cover every item");
  }
  if (drops_per_group < 1) throw ValidationError("drop selection: drops per group must be >= 1");
  std::vector<int> owner(p.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() <= drops_per_group) {
      throw ValidationError(fmt::format(
          "drop selection: group {} has {} items, cannot drop {}", g + 1, groups[g].size(),
          drops_per_group));
    }
    for (const auto& id : groups[g]) {
      const std::size_t i = p.index_of(id);
      if (owner[i] != -1) {
        throw ValidationError(fmt::format("invalid partition: item '{}' in two groups", id));
      }
      owner[i] = static_cast<int>(g);
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (owner[i] == -1) {
      throw ValidationError(
          fmt::format("invalid partition: item '{}' is in no group", p.items()[i].item_id));
    }
  }

  std::vector<bool> dropped(p.size(), false);
  for (const auto& group : groups) {
    std::vector<std::size_t> idx;
    for (const auto& id : group) idx.push_back(p.index_of(id));
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
      if (measure[l] != measure[r]) return measure[l] > measure[r];
      return id_less(p.items()[l].item_id, p.items()[r].item_id);
    });
    for (std::size_t k = 0; k < drops_per_group; ++k) dropped[idx[k]] = true;
  }

  DropSelection out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (dropped[i]) {
      out.dropped.push_back(p.items()[i].item_id);
    } else {
      kept.push_back(i);
    }
  }
  out.remaining_cost = coalition_cost_indices(p, kept);
  return out;
}

}  // namespace eoq
