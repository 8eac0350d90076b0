#pragma once

// Cooperative cost games induced by EOQ problems with exemptable ordering
// costs, and the solution machinery that runs on them.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eoq/core.hpp"

namespace eoq {

using Coalition = std::uint64_t;  // bit i set <=> player i is a member

inline constexpr std::size_t kDefaultExactThreshold = 20;
inline constexpr std::size_t kDefaultEnumerationThreshold = 22;
inline constexpr std::size_t kMemoLimit = 25;
inline constexpr double kDefaultCoreTolerance = 1e-6;

/// Cost game whose players each bring an aggregate (sum H, sum C).
///
/// cost(S) = H_S * unit_rate(H_S + H_0, C_S + C_0), where (H_0, C_0) is a
/// fixed background that always orders along but whose own cost is not
/// charged to S. With an empty background this is the coalition cost of the
/// union of the players' items. cost(empty) = 0.
class CostGame {
 public:
  CostGame(std::vector<std::string> players, std::vector<Aggregate> aggregates,
           double ordering_cost, double exemption_price, Aggregate background = {});

  /// Players are the items of `p`.
  static CostGame over_items(const Problem& p);
  /// Players are the firms of `p`; a coalition of firms orders all their items.
  static CostGame over_firms(const Problem& p);
  /// Players are the items of one firm; all other firms form the background.
  static CostGame within_firm(const Problem& p, std::size_t firm_index);

  CostGame(const CostGame& other);
  CostGame& operator=(const CostGame& other);
  CostGame(CostGame&&) noexcept = default;
  CostGame& operator=(CostGame&&) noexcept = default;
  ~CostGame() = default;

  std::size_t size() const { return players_.size(); }
  const std::vector<std::string>& players() const { return players_; }
  const std::vector<Aggregate>& aggregates() const { return aggregates_; }
  const Aggregate& background() const { return background_; }
  double ordering_cost() const { return ordering_cost_; }
  double exemption_price() const { return exemption_price_; }
  Coalition grand_coalition() const;

  /// Cost of a coalition given by bitmask; requires size() <= 64.
  double cost(Coalition members) const;
  double cost(std::span<const std::size_t> members) const;
  /// Cost of the coalition whose members sum to `members_agg`.
  double cost_of(const Aggregate& members_agg) const;
  double grand_cost() const;

  /// Turns on an insert-only memo table keyed by bitmask. Safe to share
  /// across threads. Throws LimitError when size() > kMemoLimit.
  void enable_memo();
  bool memoized() const { return memo_ != nullptr; }

 private:
  double compute(Coalition members) const;

  std::vector<std::string> players_;
  std::vector<Aggregate> aggregates_;
  double ordering_cost_;
  double exemption_price_;
  Aggregate background_;
  std::unique_ptr<std::atomic<double>[]> memo_;
};

/// Per-player monetary rates. `values` is aligned with `players`.
struct Allocation {
  std::vector<std::string> players;
  std::vector<double> values;
  double total = 0.0;

  double at(std::string_view player) const;
  double sum() const;
  /// |sum - total| <= 1e-6 * max(1, |total|).
  bool efficient() const;
};

struct SamplingConfig {
  std::uint64_t sample_count = 100000;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks hardware concurrency. Results do not depend on it.
  unsigned threads = 1;
};

struct SampledShapley {
  Allocation allocation;
  std::vector<double> std_errors;  // aligned with allocation.players
};

/// Exact Shapley value by subset enumeration; size() must not exceed
/// `exact_threshold`.
Allocation shapley_exact(const CostGame& g, std::size_t exact_threshold = kDefaultExactThreshold,
                         unsigned threads = 1);

/// Permutation-sampling estimate of the Shapley value. Values are shifted
/// additively so they sum to the grand-coalition cost. Standard errors are
/// sample standard deviations over sqrt(sample_count) (zero for one sample).
SampledShapley shapley_sampled(const CostGame& g, const SamplingConfig& cfg);

struct CoalitionExcess {
  std::vector<std::string> members;
  double excess;  // sum of allocations minus coalition cost
};

struct CoreVerdict {
  bool in_core = true;
  std::vector<CoalitionExcess> violations;
  std::uint64_t coalitions_checked = 0;
};

/// Enumerates every nonempty coalition and reports those charged more than
/// their stand-alone cost plus `tol`.
CoreVerdict core_check(const CostGame& g, const Allocation& x, double tol = kDefaultCoreTolerance,
                       std::size_t enumeration_threshold = kDefaultEnumerationThreshold);

struct SubadditivityViolation {
  std::vector<std::string> first;
  std::vector<std::string> second;
  double joint_cost;
  double separate_cost;
};

struct SubadditivityVerdict {
  bool strictly_subadditive = true;
  bool exhaustive = false;
  std::uint64_t pairs_checked = 0;
  std::vector<SubadditivityViolation> violations;
};

inline constexpr std::size_t kExhaustiveSubadditivityLimit = 12;

/// Checks cost(S u T) < cost(S) + cost(T) over disjoint nonempty pairs:
/// every unordered pair when size() <= 12, otherwise `trials` random pairs.
SubadditivityVerdict subadditivity_check(const CostGame& g, std::uint64_t trials = 10000,
                                         std::uint64_t seed = 0);

/// cost(N) - cost(N \ {i}) for each player.
std::vector<double> marginal_costs(const CostGame& g);

struct DropSelection {
  std::vector<std::string> dropped;  // sorted by the problem's item order
  double remaining_cost;
};

/// Within each group, drops the `drops_per_group` items with the largest
/// measure (ties: smaller item id first) and prices the surviving items.
/// `groups` holds item ids; `measure` is aligned with p.items().
DropSelection drop_selection(const Problem& p, const std::vector<std::vector<std::string>>& groups,
                             std::span<const double> measure, std::size_t drops_per_group);

/// Orders ids numerically when both are integers, otherwise lexicographically.
bool id_less(std::string_view lhs, std::string_view rhs);

}  // namespace eoq
