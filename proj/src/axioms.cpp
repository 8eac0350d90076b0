#include "eoq/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <fmt/format.h>

#include "eoq/error.hpp"

namespace eoq {
namespace {

struct PlayerView {
  std::vector<std::string> ids;
  std::vector<double> holding;
};

PlayerView players(const Problem& p, PlayerLevel level) {
  PlayerView v;
  if (level == PlayerLevel::Items) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      v.ids.push_back(p.items()[i].item_id);
      v.holding.push_back(p.items()[i].holding_demand());
    }
  } else {
    v.ids = p.firms();
    for (std::size_t k = 0; k < p.firms().size(); ++k) {
      v.holding.push_back(p.firm_aggregate(k).holding);
    }
  }
  return v;
}

std::vector<double> values_at(const Problem& p, const Allocation& a, PlayerLevel level) {
  if (a.values.size() != p.size()) {
    throw ValidationError("rule returned an allocation that does not cover every item");
  }
  return level == PlayerLevel::Items ? a.values : firm_totals(p, a);
}

bool same_holding(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
}

std::string level_name(PlayerLevel level) {
  return level == PlayerLevel::Items ? "items" : "firms";
}

}  // namespace

void Verdict::record(bool ok, std::vector<std::string> who, double magnitude, std::string detail) {
  ++checks;
  if (ok) return;
  holds = false;
  violations.push_back({std::move(who), magnitude, std::move(detail)});
}

void Verdict::absorb(const Verdict& other) {
  checks += other.checks;
  holds = holds && other.holds;
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

Verdict check_symmetry(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                       double tol) {
  Verdict v{fmt::format("symmetry ({})", level_name(level))};
  const auto view = players(p, level);
  const auto values = values_at(p, rule.apply(p), level);
  for (std::size_t i = 0; i < view.ids.size(); ++i) {
    for (std::size_t j = i + 1; j < view.ids.size(); ++j) {
      if (!same_holding(view.holding[i], view.holding[j])) continue;
      const double gap = std::abs(values[i] - values[j]);
      v.record(gap <= tol, {view.ids[i], view.ids[j]}, gap,
               fmt::format("equal H = {} but values {} vs {}", view.holding[i], values[i], values[j]));
    }
  }
  return v;
}

Verdict check_non_negativity(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                             double tol) {
  Verdict v{fmt::format("non-negativity ({})", level_name(level))};
  const auto view = players(p, level);
  const auto values = values_at(p, rule.apply(p), level);
  for (std::size_t i = 0; i < values.size(); ++i) {
    v.record(values[i] >= -tol, {view.ids[i]}, -values[i], fmt::format("value {}", values[i]));
  }
  return v;
}

Verdict check_hd_ranking_preservation(const AllocationRule& rule, const Problem& p,
                                      PlayerLevel level, double tol) {
  Verdict v{fmt::format("hd-ranking preservation ({})", level_name(level))};
  const auto view = players(p, level);
  const auto values = values_at(p, rule.apply(p), level);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!(view.holding[i] > view.holding[j]) || same_holding(view.holding[i], view.holding[j])) {
        continue;
      }
      v.record(values[i] >= values[j] - tol, {view.ids[i], view.ids[j]}, values[j] - values[i],
               fmt::format("H {} > {} but value {} < {}", view.holding[i], view.holding[j],
                           values[i], values[j]));
    }
  }
  return v;
}

Verdict check_stability(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                        double tol, std::size_t enumeration_threshold) {
  Verdict v{fmt::format("stability ({})", level_name(level))};
  const CostGame game =
      level == PlayerLevel::Items ? CostGame::over_items(p) : CostGame::over_firms(p);
  if (game.size() > enumeration_threshold) {
    throw LimitError(fmt::format("stability check enumerates 2^{} coalitions; limit is {}",
                                 game.size(), enumeration_threshold));
  }
  Allocation x;
  x.players = game.players();
  x.values = values_at(p, rule.apply(p), level);
  x.total = game.grand_cost();
  const double gap = x.sum() - x.total;
  if (std::abs(gap) > tol) {
    v.record(false, x.players, gap, fmt::format("allocation sums to {}, c(N) = {}", x.sum(), x.total));
    return v;
  }
  const auto core = core_check(game, x, tol, enumeration_threshold);
  v.checks = core.coalitions_checked;
  for (const auto& violation : core.violations) {
    v.holds = false;
    v.violations.push_back({violation.members, violation.excess, "coalition pays above its cost"});
  }
  return v;
}

Verdict check_balanced_contributions(const AllocationRule& rule, const Problem& p, double tol) {
  Verdict v{"balanced contributions (items within firms)"};
  const Allocation full = rule.apply(p);
  std::map<std::size_t, Allocation> reduced;
  auto without = [&](std::size_t r) -> const Allocation& {
    auto it = reduced.find(r);
    if (it == reduced.end()) {
      const std::size_t drop[] = {r};
      it = reduced.emplace(r, rule.apply(p.without(drop))).first;
    }
    return it->second;
  };
  for (const auto& members : p.firm_members()) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t i = members[a];
        const std::size_t j = members[b];
        const auto& id_i = p.items()[i].item_id;
        const auto& id_j = p.items()[j].item_id;
        const double effect_on_i = full.values[i] - without(j).at(id_i);
        const double effect_on_j = full.values[j] - without(i).at(id_j);
        const double gap = std::abs(effect_on_i - effect_on_j);
        v.record(gap <= tol, {id_i, id_j}, gap,
                 fmt::format("removing the partner shifts values by {} vs {}", effect_on_i,
                             effect_on_j));
      }
    }
  }
  return v;
}

Problem merged_problem(const Problem& p, const MergeSpec& m) {
  if (m.absorbed.empty()) throw ValidationError("merge: nothing to absorb");
  std::unordered_set<std::string> absorbed(m.absorbed.begin(), m.absorbed.end());
  if (absorbed.size() != m.absorbed.size()) throw ValidationError("merge: repeated absorbed id");
  if (absorbed.contains(m.absorber)) throw ValidationError("merge: absorber is also absorbed");

  std::vector<ItemRecord> items;
  if (m.level == PlayerLevel::Items) {
    const std::size_t target = p.index_of(m.absorber);
    Aggregate merged = p.item_aggregate(target);
    for (const auto& id : m.absorbed) merged += p.item_aggregate(p.index_of(id));
    for (const auto& it : p.items()) {
      if (absorbed.contains(it.item_id)) continue;
      if (it.item_id == m.absorber) {
        items.push_back({it.item_id, it.firm_id, 1.0, merged.holding, merged.acquisition});
      } else {
        items.push_back(it);
      }
    }
  } else {
    auto firm_index = [&](const std::string& id) {
      const auto& f = p.firms();
      auto pos = std::find(f.begin(), f.end(), id);
      if (pos == f.end()) throw ValidationError(fmt::format("merge: unknown firm '{}'", id));
      return static_cast<std::size_t>(pos - f.begin());
    };
    const std::size_t target = firm_index(m.absorber);
    Aggregate merged = p.firm_aggregate(target);
    for (const auto& id : m.absorbed) merged += p.firm_aggregate(firm_index(id));
    const std::size_t first = p.firm_members()[target].front();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& it = p.items()[i];
      if (absorbed.contains(it.firm_id)) continue;
      if (p.firm_of(i) == target) {
        if (i == first) {
          items.push_back({it.item_id, it.firm_id, 1.0, merged.holding, merged.acquisition});
        }
        continue;
      }
      items.push_back(it);
    }
  }
  return Problem(std::move(items), p.ordering_cost(), p.exemption_price());
}

NonManipulabilityVerdict check_non_manipulability(const AllocationRule& rule, const Problem& p,
                                                  const MergeSpec& m, double tol) {
  const std::string lvl = level_name(m.level);
  NonManipulabilityVerdict out{Verdict{fmt::format("non-manipulability ({})", lvl)},
                               Verdict{fmt::format("strong non-manipulability ({})", lvl)}};
  const Problem merged = merged_problem(p, m);
  const auto before_ids = players(p, m.level).ids;
  const auto after_ids = players(merged, m.level).ids;
  const auto before = values_at(p, rule.apply(p), m.level);
  const auto after = values_at(merged, rule.apply(merged), m.level);

  auto value_of = [](const std::vector<std::string>& ids, const std::vector<double>& vals,
                     const std::string& id) {
    auto pos = std::find(ids.begin(), ids.end(), id);
    if (pos == ids.end()) throw ValidationError(fmt::format("merge: unknown player '{}'", id));
    return vals[static_cast<std::size_t>(pos - ids.begin())];
  };

  double expected = value_of(before_ids, before, m.absorber);
  for (const auto& id : m.absorbed) expected += value_of(before_ids, before, id);
  const double got = value_of(after_ids, after, m.absorber);
  std::vector<std::string> who{m.absorber};
  who.insert(who.end(), m.absorbed.begin(), m.absorbed.end());
  out.merge.record(std::abs(got - expected) <= tol, who, std::abs(got - expected),
                   fmt::format("merged player receives {} instead of {}", got, expected));

  for (std::size_t k = 0; k < after_ids.size(); ++k) {
    if (after_ids[k] == m.absorber) continue;
    const double was = value_of(before_ids, before, after_ids[k]);
    out.strong.record(std::abs(after[k] - was) <= tol, {after_ids[k]}, std::abs(after[k] - was),
                      fmt::format("untouched player moves from {} to {}", was, after[k]));
  }
  return out;
}

Problem random_problem(Rng& rng, const RandomProblemOptions& o) {
  if (o.min_items < 1 || o.max_items < o.min_items || o.max_firms < 1) {
    throw ValidationError("random problem: inconsistent size options");
  }
  const std::size_t n = o.min_items + rng.below(o.max_items - o.min_items + 1);
  const std::size_t firms = 1 + rng.below(std::min(o.max_firms, n));

  std::vector<ItemRecord> items;
  for (std::size_t i = 0; i < n; ++i) {
    ItemRecord it;
    it.item_id = std::to_string(i + 1);
    // The first `firms` items seed one firm each so no firm is empty.
    it.firm_id = "F" + std::to_string((i < firms ? i : rng.below(firms)) + 1);
    if (i > 0 && rng.uniform() < o.tie_probability) {
      const auto& src = items[rng.below(i)];
      it.demand_rate = src.demand_rate;
      it.holding_cost_rate = src.holding_cost_rate;
    } else {
      it.demand_rate = static_cast<double>(1 + rng.below(500));
      it.holding_cost_rate = std::round(rng.uniform(0.05, 0.5) * 100.0) / 100.0;
    }
    it.acquisition_cost = std::round(rng.uniform(1.0, 100.0) * 100.0) / 100.0;
    items.push_back(std::move(it));
  }

  if (firms >= 2 && rng.uniform() < o.mirror_firm_probability) {
    // Rebuild the last firm as a copy of the first firm's (d, h) profile.
    const std::string first = "F1";
    const std::string last = "F" + std::to_string(firms);
    std::vector<ItemRecord> kept;
    std::vector<ItemRecord> copies;
    for (const auto& it : items) {
      if (it.firm_id != last) kept.push_back(it);
    }
    for (const auto& it : kept) {
      if (it.firm_id != first) continue;
      ItemRecord c = it;
      c.firm_id = last;
      c.acquisition_cost = std::round(rng.uniform(1.0, 100.0) * 100.0) / 100.0;
      copies.push_back(std::move(c));
    }
    if (kept.size() + copies.size() <= o.max_items) {
      kept.insert(kept.end(), copies.begin(), copies.end());
      for (std::size_t i = 0; i < kept.size(); ++i) kept[i].item_id = std::to_string(i + 1);
      items = std::move(kept);
    }
  }

  const double a = std::round(rng.uniform(10.0, 3000.0));
  Aggregate total;
  for (const auto& it : items) total += {it.holding_demand(), it.acquisition_demand()};
  // B at which 2 sqrt(2a / H_N) == B / C_N, scaled by a log-uniform factor in [1/4, 4].
  const double boundary = 2.0 * total.acquisition * std::sqrt(2.0 * a / total.holding);
  const double b = boundary * std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
  return Problem(std::move(items), a, b);
}

std::vector<Verdict> run_axiom_battery(BatteryRule which, const Problem& p, double tol) {
  const bool hd = which == BatteryRule::Hd;
  const PlayerLevel level = hd ? PlayerLevel::Items : PlayerLevel::Firms;
  const AllocationRule rule = hd ? hd_rule() : sp_rule();

  std::vector<Verdict> out;
  out.push_back(check_symmetry(rule, p, level, tol));
  out.push_back(check_non_negativity(rule, p, level, tol));

  const auto ids = players(p, level).ids;
  NonManipulabilityVerdict nm{Verdict{fmt::format("non-manipulability ({})", level_name(level))},
                              Verdict{fmt::format("strong non-manipulability ({})",
                                                  level_name(level))}};
  std::vector<MergeSpec> merges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (i != j) merges.push_back({level, ids[i], {ids[j]}});
    }
  }
  if (ids.size() >= 3) merges.push_back({level, ids[0], {ids.begin() + 1, ids.end()}});
  for (const auto& m : merges) {
    const auto r = check_non_manipulability(rule, p, m, tol);
    nm.merge.absorb(r.merge);
    nm.strong.absorb(r.strong);
  }
  out.push_back(std::move(nm.merge));
  out.push_back(std::move(nm.strong));

  if (hd) {
    out.push_back(check_hd_ranking_preservation(rule, p, level, tol));
  } else {
    out.push_back(check_balanced_contributions(rule, p, tol));
  }
  out.push_back(check_stability(rule, p, level, tol));
  return out;
}

}  // namespace eoq
