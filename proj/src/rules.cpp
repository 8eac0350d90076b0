#include "eoq/rules.hpp"

#include <fmt/format.h>

#include "eoq/error.hpp"
#include "eoq/rng.hpp"

namespace eoq {

Allocation hd_proportional(const Problem& p) {
  const double rate = p.grand_rate();
  Allocation out;
  out.total = aggregate_cost(p.total_aggregate(), p.ordering_cost(), p.exemption_price());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.players.push_back(p.items()[i].item_id);
    out.values.push_back(p.items()[i].holding_demand() * rate);
  }
  return out;
}

double FirmAllocation::firm_total(std::string_view firm) const {
  for (std::size_t k = 0; k < firms.size(); ++k) {
    if (firms[k] == firm) return per_firm[k];
  }
  throw ValidationError(fmt::format("no firm '{}'", firm));
}

std::vector<double> firm_totals(const Problem& p, const Allocation& per_item) {
  if (per_item.values.size() != p.size()) {
    throw ValidationError("allocation does not cover the problem's items");
  }
  std::vector<double> totals(p.firms().size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) totals[p.firm_of(i)] += per_item.values[i];
  return totals;
}

namespace {

struct GameSolution {
  Allocation allocation;
  std::vector<double> std_errors;
};

GameSolution solve(const CostGame& g, const ShapleyMode& mode, std::uint64_t stream) {
  if (mode.kind == ShapleyMode::Kind::Exact) {
    return {shapley_exact(g, mode.exact_threshold, mode.sampling.threads), {}};
  }
  SamplingConfig cfg = mode.sampling;
  cfg.seed = stream_seed(cfg.seed, stream);
  auto sampled = shapley_sampled(g, cfg);
  return {std::move(sampled.allocation), std::move(sampled.std_errors)};
}

}  // namespace

FirmAllocation shapley_proportional(const Problem& p, const ShapleyMode& mode) {
  if (mode.kind == ShapleyMode::Kind::Exact) {
    for (std::size_t k = 0; k < p.firms().size(); ++k) {
      if (p.firm_members()[k].size() > mode.exact_threshold) {
        throw LimitError(fmt::format("firm '{}' has {} items; exact threshold is {}", p.firms()[k],
                                     p.firm_members()[k].size(), mode.exact_threshold));
      }
    }
  }
  const double rate = p.grand_rate();

  FirmAllocation out;
  out.firms = p.firms();
  out.per_item.total = hd_proportional(p).total;
  out.per_item.values.assign(p.size(), 0.0);
  for (const auto& it : p.items()) out.per_item.players.push_back(it.item_id);
  if (mode.kind == ShapleyMode::Kind::Sampled) out.std_errors.assign(p.size(), 0.0);

  for (std::size_t k = 0; k < p.firms().size(); ++k) {
    out.per_firm.push_back(p.firm_aggregate(k).holding * rate);
    const auto game = CostGame::within_firm(p, k);
    const auto solution = solve(game, mode, k);
    const auto& members = p.firm_members()[k];
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.per_item.values[members[j]] = solution.allocation.values[j];
      if (!solution.std_errors.empty()) out.std_errors[members[j]] = solution.std_errors[j];
    }
  }
  return out;
}

Allocation item_shapley(const Problem& p, const ShapleyMode& mode) {
  const CostGame g = CostGame::over_items(p);
  if (mode.kind == ShapleyMode::Kind::Exact) {
    return shapley_exact(g, mode.exact_threshold, mode.sampling.threads);
  }
  return shapley_sampled(g, mode.sampling).allocation;
}

AllocationRule hd_rule() { return {"hd", [](const Problem& p) { return hd_proportional(p); }}; }

AllocationRule sp_rule(const ShapleyMode& mode) {
  return {"sp", [mode](const Problem& p) { return shapley_proportional(p, mode).per_item; }};
}

AllocationRule shapley_rule(const ShapleyMode& mode) {
  return {"shapley", [mode](const Problem& p) { return item_shapley(p, mode); }};
}

}  // namespace eoq
