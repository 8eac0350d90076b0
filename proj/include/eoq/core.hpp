#pragma once

// Closed-form EOQ mathematics with exemptable ordering costs.
//
// Units contract: demand in units/time, holding cost in money/(unit*time),
// acquisition cost in money/unit, ordering cost and exemption price in
// money. Every cost returned here is money/time. Lead time is zero.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace eoq {

/// Single item, single firm. The ordering cost `a` is waived for orders of
/// at least `exemption_quantity` units.
struct BasicProblem {
  double demand_rate;
  double holding_cost_rate;
  double ordering_cost;
  double exemption_quantity;

  void validate() const;
};

struct BasicPolicy {
  double order_size;
  double cost_per_time;
};

/// Minimizer of the average cost per time unit. At the branch boundary
/// 2*sqrt(2ad/h) == A the exemption quantity A is returned.
BasicPolicy basic_optimal_policy(const BasicProblem& p);

/// Average cost per time unit when ordering `order_size` units each cycle.
double basic_cpt(const BasicProblem& p, double order_size);

struct ItemRecord {
  std::string item_id;
  std::string firm_id;
  double demand_rate;
  double holding_cost_rate;
  double acquisition_cost;

  /// Holding cost of the demand, h*d.
  double holding_demand() const { return holding_cost_rate * demand_rate; }
  /// Acquisition value of the demand, c*d.
  double acquisition_demand() const { return acquisition_cost * demand_rate; }
};

/// Aggregate (sum H, sum C) of a set of items. Every coalition cost depends
/// on the items only through these two sums.
struct Aggregate {
  double holding = 0.0;
  double acquisition = 0.0;

  Aggregate& operator+=(const Aggregate& o) {
    holding += o.holding;
    acquisition += o.acquisition;
    return *this;
  }
  friend Aggregate operator+(Aggregate l, const Aggregate& r) { return l += r; }
  bool empty() const { return holding == 0.0 && acquisition == 0.0; }
};

/// Cost per unit of H for a joint order with aggregates `agg`:
/// min{ B / (2 sum C), sqrt(2a / sum H) }. Requires a nonempty aggregate.
double unit_rate(const Aggregate& agg, double ordering_cost, double exemption_price);

/// (sum H) * unit_rate; zero for the empty aggregate.
double aggregate_cost(const Aggregate& agg, double ordering_cost, double exemption_price);

/// Multi-firm, multi-item problem. The single-firm case is the multi-item
/// model; one item per firm is the multi-firm model.
class Problem {
 public:
  Problem(std::vector<ItemRecord> items, double ordering_cost, double exemption_price);

  const std::vector<ItemRecord>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  double ordering_cost() const { return ordering_cost_; }
  double exemption_price() const { return exemption_price_; }

  /// Index of `item_id`; throws ValidationError for unknown ids.
  std::size_t index_of(std::string_view item_id) const;
  bool contains(std::string_view item_id) const;

  /// Firm ids in order of first appearance.
  const std::vector<std::string>& firms() const { return firm_ids_; }
  /// Item indices of each firm, aligned with firms().
  const std::vector<std::vector<std::size_t>>& firm_members() const { return firm_members_; }
  std::size_t firm_of(std::size_t item_index) const { return item_firm_[item_index]; }

  Aggregate item_aggregate(std::size_t index) const;
  Aggregate aggregate(std::span<const std::size_t> indices) const;
  Aggregate total_aggregate() const;
  Aggregate firm_aggregate(std::size_t firm_index) const;

  /// Unit rate of the grand coalition.
  double grand_rate() const;

  /// Copy with the listed items removed. Throws if nothing would remain.
  Problem without(std::span<const std::size_t> removed) const;

 private:
  std::vector<ItemRecord> items_;
  double ordering_cost_;
  double exemption_price_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> firm_ids_;
  std::vector<std::vector<std::size_t>> firm_members_;
  std::vector<std::size_t> item_firm_;
};

/// Minimum average cost per time unit for the items `item_ids` ordering
/// jointly. Zero for the empty coalition.
double coalition_cost(const Problem& p, std::span<const std::string> item_ids);
double coalition_cost_indices(const Problem& p, std::span<const std::size_t> indices);

struct PolicyReport {
  std::vector<std::pair<std::string, double>> order_sizes;
  double cycle_length;
  double orders_per_time;
  double cost_per_time;
  /// True when the joint order reaches the exemption price.
  bool exempt;
};

/// Optimal joint ordering policy of a nonempty coalition.
PolicyReport coalition_policy(const Problem& p, std::span<const std::string> item_ids);
PolicyReport coalition_policy_indices(const Problem& p, std::span<const std::size_t> indices);

/// Replaces every item's (d, h, c) by (1, h*d, c*d). Costs are unchanged.
Problem factorized(const Problem& p);

}  // namespace eoq
