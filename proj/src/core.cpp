#include "eoq/core.hpp"

#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "eoq/error.hpp"

namespace eoq {
namespace {

void require_positive(double value, std::string_view what) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ValidationError(fmt::format("{} must be positive and finite (got {})", what, value));
  }
}

}  // namespace

void BasicProblem::validate() const {
  require_positive(demand_rate, "demand rate");
  require_positive(holding_cost_rate, "holding cost rate");
  require_positive(ordering_cost, "ordering cost");
  require_positive(exemption_quantity, "exemption quantity");
}

BasicPolicy basic_optimal_policy(const BasicProblem& p) {
  p.validate();
  const double d = p.demand_rate;
  const double h = p.holding_cost_rate;
  const double a = p.ordering_cost;
  const double eoq = std::sqrt(2.0 * a * d / h);
  if (2.0 * eoq < p.exemption_quantity) {
    return {eoq, std::sqrt(2.0 * a * d * h)};
  }
  return {p.exemption_quantity, h * p.exemption_quantity / 2.0};
}

double basic_cpt(const BasicProblem& p, double order_size) {
  p.validate();
  require_positive(order_size, "order size");
  const double holding = p.holding_cost_rate * order_size / 2.0;
  if (order_size < p.exemption_quantity) {
    return p.ordering_cost * p.demand_rate / order_size + holding;
  }
  return holding;
}

double unit_rate(const Aggregate& agg, double ordering_cost, double exemption_price) {
  return std::min(exemption_price / (2.0 * agg.acquisition),
                  std::sqrt(2.0 * ordering_cost / agg.holding));
}

double aggregate_cost(const Aggregate& agg, double ordering_cost, double exemption_price) {
  if (agg.holding <= 0.0) return 0.0;
  return agg.holding * unit_rate(agg, ordering_cost, exemption_price);
}

Problem::Problem(std::vector<ItemRecord> items, double ordering_cost, double exemption_price)
    : items_(std::move(items)), ordering_cost_(ordering_cost), exemption_price_(exemption_price) {
  require_positive(ordering_cost_, "ordering cost");
  require_positive(exemption_price_, "exemption price");
  if (items_.empty()) throw ValidationError("a problem needs at least one item");

  std::unordered_map<std::string, std::size_t> firm_index;
  item_firm_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const ItemRecord& it = items_[i];
    if (it.item_id.empty()) throw ValidationError(fmt::format("item #{} has an empty id", i + 1));
    const auto ctx = [&](std::string_view field) {
      return fmt::format("item '{}': {}", it.item_id, field);
    };
    require_positive(it.demand_rate, ctx("demand rate"));
    require_positive(it.holding_cost_rate, ctx("holding cost rate"));
    require_positive(it.acquisition_cost, ctx("acquisition cost"));
    require_positive(it.holding_demand(), ctx("h*d"));
    require_positive(it.acquisition_demand(), ctx("c*d"));
    if (!index_.emplace(it.item_id, i).second) {
      throw ValidationError(fmt::format("duplicate item id '{}'", it.item_id));
    }
    auto [pos, inserted] = firm_index.emplace(it.firm_id, firm_ids_.size());
    if (inserted) {
      firm_ids_.push_back(it.firm_id);
      firm_members_.emplace_back();
    }
    firm_members_[pos->second].push_back(i);
    item_firm_.push_back(pos->second);
  }
}

std::size_t Problem::index_of(std::string_view item_id) const {
  auto it = index_.find(std::string(item_id));
  if (it == index_.end()) throw ValidationError(fmt::format("unknown item id '{}'", item_id));
  return it->second;
}

bool Problem::contains(std::string_view item_id) const {
  return index_.contains(std::string(item_id));
}

Aggregate Problem::item_aggregate(std::size_t index) const {
  return {items_[index].holding_demand(), items_[index].acquisition_demand()};
}

Aggregate Problem::aggregate(std::span<const std::size_t> indices) const {
  Aggregate agg;
  for (std::size_t i : indices) agg += item_aggregate(i);
  return agg;
}

Aggregate Problem::total_aggregate() const {
  Aggregate agg;
  for (std::size_t i = 0; i < items_.size(); ++i) agg += item_aggregate(i);
  return agg;
}

Aggregate Problem::firm_aggregate(std::size_t firm_index) const {
  return aggregate(firm_members_.at(firm_index));
}

double Problem::grand_rate() const {
  return unit_rate(total_aggregate(), ordering_cost_, exemption_price_);
}

Problem Problem::without(std::span<const std::size_t> removed) const {
  std::vector<bool> drop(items_.size(), false);
  for (std::size_t i : removed) drop.at(i) = true;
  std::vector<ItemRecord> kept;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!drop[i]) kept.push_back(items_[i]);
  }
  return Problem(std::move(kept), ordering_cost_, exemption_price_);
}

namespace {

std::vector<std::size_t> resolve(const Problem& p, std::span<const std::string> ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  std::unordered_set<std::size_t> seen;
  for (const auto& id : ids) {
    std::size_t i = p.index_of(id);
    if (seen.insert(i).second) out.push_back(i);
  }
  return out;
}

}  // namespace

double coalition_cost_indices(const Problem& p, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  return aggregate_cost(p.aggregate(indices), p.ordering_cost(), p.exemption_price());
}

double coalition_cost(const Problem& p, std::span<const std::string> item_ids) {
  const auto indices = resolve(p, item_ids);
  return coalition_cost_indices(p, indices);
}

PolicyReport coalition_policy_indices(const Problem& p, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ValidationError("coalition policy needs a nonempty coalition");
  const Aggregate agg = p.aggregate(indices);
  const double a = p.ordering_cost();
  const double b = p.exemption_price();

  const double eoq_cycle = std::sqrt(2.0 * a / agg.holding);
  const double exempt_cycle = b / agg.acquisition;
  const bool exempt = 2.0 * eoq_cycle >= exempt_cycle;

  PolicyReport report;
  report.exempt = exempt;
  report.cycle_length = exempt ? exempt_cycle : eoq_cycle;
  report.orders_per_time = 1.0 / report.cycle_length;
  report.cost_per_time = aggregate_cost(agg, a, b);
  report.order_sizes.reserve(indices.size());
  for (std::size_t i : indices) {
    report.order_sizes.emplace_back(p.items()[i].item_id,
                                    p.items()[i].demand_rate * report.cycle_length);
  }
  return report;
}

PolicyReport coalition_policy(const Problem& p, std::span<const std::string> item_ids) {
  const auto indices = resolve(p, item_ids);
  return coalition_policy_indices(p, indices);
}

Problem factorized(const Problem& p) {
  std::vector<ItemRecord> items = p.items();
  for (auto& it : items) {
    const double holding = it.holding_demand();
    const double acquisition = it.acquisition_demand();
    it.demand_rate = 1.0;
    it.holding_cost_rate = holding;
    it.acquisition_cost = acquisition;
  }
  return Problem(std::move(items), p.ordering_cost(), p.exemption_price());
}

}  // namespace eoq
