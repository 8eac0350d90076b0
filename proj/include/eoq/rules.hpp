#pragma once

// Cost allocation rules for joint ordering with exemptable ordering costs.

#include <functional>
#include <string>
#include <vector>

#include "eoq/core.hpp"
#include "eoq/game.hpp"

namespace eoq {

/// Share proportional to each item's holding cost of demand H_i:
/// phi_i = H_i * min{ B / (2 sum C), sqrt(2a / sum H) }.
/// Always in the core of the item game.
Allocation hd_proportional(const Problem& p);

struct ShapleyMode {
  enum class Kind { Exact, Sampled };
  Kind kind = Kind::Exact;
  std::size_t exact_threshold = kDefaultExactThreshold;
  /// Used in sampled mode; each firm samples its own stream from this seed.
  SamplingConfig sampling{};
};

struct FirmAllocation {
  Allocation per_item;                 // players are the problem's items, in order
  std::vector<std::string> firms;      // the problem's firms, in order
  std::vector<double> per_firm;        // aligned with `firms`
  /// Per-item standard errors in sampled mode; empty in exact mode.
  std::vector<double> std_errors;

  double firm_total(std::string_view firm) const;
};

/// Two-phase rule: firms receive hd-proportional shares of the grand cost
/// computed from their aggregate H; each firm's share is then split among
/// its items by the Shapley value of the game S -> share of firm k when its
/// items are reduced to S and the other firms are unchanged.
FirmAllocation shapley_proportional(const Problem& p, const ShapleyMode& mode = {});

/// Exact (or sampled) Shapley value of the item game, ignoring firms.
Allocation item_shapley(const Problem& p, const ShapleyMode& mode = {});

/// A named map from problems to per-item allocations; the verifiers derive
/// firm totals from the problem's firm partition.
struct AllocationRule {
  std::string name;
  std::function<Allocation(const Problem&)> apply;
};

AllocationRule hd_rule();
AllocationRule sp_rule(const ShapleyMode& mode = {});
AllocationRule shapley_rule(const ShapleyMode& mode = {});

/// Sums per-item values over each firm of `p`.
std::vector<double> firm_totals(const Problem& p, const Allocation& per_item);

}  // namespace eoq
