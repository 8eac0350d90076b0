#include "eoq/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "eoq/axioms.hpp"
#include "eoq/error.hpp"
#include "eoq/rules.hpp"

namespace eoq::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kCoreTolerance = kDefaultCoreTolerance;
constexpr double kAxiomTolerance = kDefaultAxiomTolerance;
constexpr std::size_t kMaxReportedViolations = 10;

double shown(const RunConfig& cfg, double v) {
  if (cfg.full_precision) return v;
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

std::string cell(const RunConfig& cfg, double v) {
  if (cfg.full_precision) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
  }
  return fmt::format("{:.6f}", shown(cfg, v));
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

Problem problem_of(const RunConfig& cfg, const ItemTable& table) {
  return to_problem(table, cfg.ordering_cost, cfg.exemption_price);
}

Json verdict_json(const Verdict& v) {
  Json j;
  j["property"] = v.property;
  j["holds"] = v.holds;
  j["checks"] = v.checks;
  j["violations"] = v.violations.size();
  Json examples = Json::array();
  for (std::size_t i = 0; i < std::min(v.violations.size(), kMaxReportedViolations); ++i) {
    examples.push_back({{"players", v.violations[i].players},
                        {"magnitude", v.violations[i].magnitude},
                        {"detail", v.violations[i].detail}});
  }
  j["examples"] = std::move(examples);
  return j;
}

struct RuleOutput {
  Allocation per_item;
  std::vector<double> std_errors;
  std::vector<std::string> firms;
  std::vector<double> per_firm;
};

RuleOutput apply_rule(const RunConfig& cfg, const Problem& p, RuleKind rule) {
  RuleOutput out;
  switch (rule) {
    case RuleKind::Hd:
      out.per_item = hd_proportional(p);
      break;
    case RuleKind::Sp: {
      ShapleyMode mode;
      mode.exact_threshold = cfg.exact_threshold;
      mode.sampling = cfg.sampling;
      auto sp = shapley_proportional(p, mode);
      out.per_item = std::move(sp.per_item);
      out.firms = std::move(sp.firms);
      out.per_firm = std::move(sp.per_firm);
      break;
    }
    case RuleKind::ShapleyExact:
      out.per_item = shapley_exact(CostGame::over_items(p), cfg.exact_threshold, cfg.sampling.threads);
      break;
    case RuleKind::ShapleySampled: {
      auto s = shapley_sampled(CostGame::over_items(p), cfg.sampling);
      out.per_item = std::move(s.allocation);
      out.std_errors = std::move(s.std_errors);
      break;
    }
  }
  return out;
}

}  // namespace

RuleKind parse_rule(std::string_view name) {
  if (name == "hd") return RuleKind::Hd;
  if (name == "sp") return RuleKind::Sp;
  if (name == "shapley-exact") return RuleKind::ShapleyExact;
  if (name == "shapley-sampled") return RuleKind::ShapleySampled;
  throw ValidationError(
      fmt::format("unknown rule '{}' (expected shapley-exact, shapley-sampled, hd or sp)", name));
}

std::string_view rule_name(RuleKind rule) {
  switch (rule) {
    case RuleKind::Hd: return "hd";
    case RuleKind::Sp: return "sp";
    case RuleKind::ShapleyExact: return "shapley-exact";
    case RuleKind::ShapleySampled: return "shapley-sampled";
  }
  return "?";
}

CommandResult cmd_optimize(const RunConfig& cfg, const ItemTable& table,
                           std::span<const std::string> coalition) {
  const Problem p = problem_of(cfg, table);
  std::vector<std::string> ids(coalition.begin(), coalition.end());
  if (ids.empty()) {
    for (const auto& it : p.items()) ids.push_back(it.item_id);
  }
  const PolicyReport r = coalition_policy(p, ids);

  CommandResult res;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "item,order_size,cycle_length,orders_per_time,cost_per_time\n";
    for (const auto& [id, q] : r.order_sizes) {
      res.output += fmt::format("{},{},{},{},{}\n", id, cell(cfg, q), cell(cfg, r.cycle_length),
                                cell(cfg, r.orders_per_time), cell(cfg, r.cost_per_time));
    }
    return res;
  }
  Json j;
  Json sizes = Json::object();
  for (const auto& [id, q] : r.order_sizes) sizes[id] = shown(cfg, q);
  j["order_sizes"] = std::move(sizes);
  j["cycle_length"] = shown(cfg, r.cycle_length);
  j["orders_per_time"] = shown(cfg, r.orders_per_time);
  j["cost_per_time"] = shown(cfg, r.cost_per_time);
  j["exempt"] = r.exempt;
  res.output = render(j);
  return res;
}

CommandResult cmd_allocate(const RunConfig& cfg, const ItemTable& table) {
  const Problem p = problem_of(cfg, table);
  const RuleKind rule = cfg.rule.value_or(RuleKind::Hd);
  const RuleOutput r = apply_rule(cfg, p, rule);

  CommandResult res;
  const bool sampled = !r.std_errors.empty();
  if (cfg.format == OutputFormat::Csv) {
    res.output = sampled ? "item,firm,value,std_error\n" : "item,firm,value\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
      res.output += fmt::format("{},{},{}", p.items()[i].item_id, p.items()[i].firm_id,
                                cell(cfg, r.per_item.values[i]));
      if (sampled) res.output += "," + cell(cfg, r.std_errors[i]);
      res.output += "\n";
    }
    return res;
  }
  Json j;
  j["rule"] = rule_name(rule);
  j["total"] = shown(cfg, r.per_item.total);
  if (rule == RuleKind::ShapleySampled) {
    j["samples"] = cfg.sampling.sample_count;
    j["seed"] = cfg.sampling.seed;
  }
  Json items = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    Json row{{"item", p.items()[i].item_id},
             {"firm", p.items()[i].firm_id},
             {"value", shown(cfg, r.per_item.values[i])}};
    if (sampled) row["std_error"] = shown(cfg, r.std_errors[i]);
    items.push_back(std::move(row));
  }
  j["items"] = std::move(items);
  if (!r.firms.empty()) {
    Json firms = Json::array();
    for (std::size_t k = 0; k < r.firms.size(); ++k) {
      firms.push_back({{"firm", r.firms[k]}, {"value", shown(cfg, r.per_firm[k])}});
    }
    j["firms"] = std::move(firms);
  }
  res.output = render(j);
  return res;
}

CommandResult cmd_game_export(const RunConfig& cfg, const ItemTable& table, std::size_t max_n) {
  const Problem p = problem_of(cfg, table);
  if (p.size() > max_n) {
    throw LimitError(fmt::format("game export lists 2^{} coalitions; limit is {} items", p.size(),
                                 max_n));
  }
  if (p.size() > 30) throw LimitError("game export supports at most 30 items");
  const CostGame g = CostGame::over_items(p);
  const Coalition end = Coalition{1} << g.size();

  CommandResult res;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "mask,cost\n";
    for (Coalition m = 0; m < end; ++m) res.output += fmt::format("{},{}\n", m, cell(cfg, g.cost(m)));
    return res;
  }
  Json j;
  j["players"] = g.players();
  Json rows = Json::array();
  for (Coalition m = 0; m < end; ++m) rows.push_back({{"mask", m}, {"cost", shown(cfg, g.cost(m))}});
  j["coalitions"] = std::move(rows);
  res.output = render(j);
  return res;
}

CommandResult cmd_core_check(const RunConfig& cfg, const ItemTable& table, CoreLevel level) {
  const Problem p = problem_of(cfg, table);
  const RuleKind rule = cfg.rule.value_or(RuleKind::Hd);
  const RuleOutput r = apply_rule(cfg, p, rule);
  const double tol = cfg.tol.value_or(kCoreTolerance);

  const CostGame g = level == CoreLevel::Items ? CostGame::over_items(p) : CostGame::over_firms(p);
  Allocation x;
  x.players = g.players();
  x.values = level == CoreLevel::Items ? r.per_item.values : firm_totals(p, r.per_item);
  x.total = r.per_item.total;
  const CoreVerdict v = core_check(g, x, tol, cfg.enumeration_threshold);

  CommandResult res;
  res.exit_code = v.in_core ? kExitOk : kExitViolation;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "members,excess\n";
    for (const auto& e : v.violations) {
      res.output += fmt::format("{},{}\n", fmt::join(e.members, ";"), cell(cfg, e.excess));
    }
    return res;
  }
  Json j;
  j["rule"] = rule_name(rule);
  j["level"] = level == CoreLevel::Items ? "items" : "firms";
  j["tolerance"] = tol;
  j["in_core"] = v.in_core;
  j["coalitions_checked"] = v.coalitions_checked;
  Json violations = Json::array();
  for (const auto& e : v.violations) {
    violations.push_back({{"members", e.members}, {"excess", shown(cfg, e.excess)}});
  }
  j["violations"] = std::move(violations);
  res.output = render(j);
  return res;
}

namespace {

std::vector<BatteryRule> battery_rules(const RunConfig& cfg) {
  if (!cfg.rule) return {BatteryRule::Hd, BatteryRule::ShapleyProportional};
  if (*cfg.rule == RuleKind::Hd) return {BatteryRule::Hd};
  if (*cfg.rule == RuleKind::Sp) return {BatteryRule::ShapleyProportional};
  throw ValidationError("axioms: --rule must be hd or sp");
}

std::string_view battery_name(BatteryRule r) { return r == BatteryRule::Hd ? "hd" : "sp"; }

CommandResult render_battery(const RunConfig& cfg,
                             const std::vector<std::pair<BatteryRule, std::vector<Verdict>>>& runs,
                             std::size_t problems) {
  bool all_hold = true;
  Json j;
  j["problems"] = problems;
  j["tolerance"] = cfg.tol.value_or(kAxiomTolerance);
  Json rules = Json::array();
  for (const auto& [rule, verdicts] : runs) {
    Json props = Json::array();
    for (const auto& v : verdicts) {
      all_hold = all_hold && v.holds;
      props.push_back(verdict_json(v));
    }
    rules.push_back({{"rule", battery_name(rule)}, {"properties", std::move(props)}});
  }
  j["rules"] = std::move(rules);
  j["all_hold"] = all_hold;

  CommandResult res;
  res.exit_code = all_hold ? kExitOk : kExitViolation;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "rule,property,holds,checks,violations\n";
    for (const auto& [rule, verdicts] : runs) {
      for (const auto& v : verdicts) {
        res.output += fmt::format("{},{},{},{},{}\n", battery_name(rule), v.property,
                                  v.holds ? "true" : "false", v.checks, v.violations.size());
      }
    }
  } else {
    res.output = render(j);
  }
  return res;
}

// Folds per-problem verdicts into one verdict per property.
void accumulate(std::vector<Verdict>& into, const std::vector<Verdict>& more) {
  if (into.empty()) {
    into = more;
    return;
  }
  for (std::size_t i = 0; i < into.size(); ++i) into[i].absorb(more[i]);
}

}  // namespace

CommandResult cmd_axioms(const RunConfig& cfg, const ItemTable& table) {
  const Problem p = problem_of(cfg, table);
  const double tol = cfg.tol.value_or(kAxiomTolerance);
  std::vector<std::pair<BatteryRule, std::vector<Verdict>>> runs;
  for (BatteryRule r : battery_rules(cfg)) runs.emplace_back(r, run_axiom_battery(r, p, tol));
  return render_battery(cfg, runs, 1);
}

CommandResult cmd_axiom_suite(const RunConfig& cfg, std::size_t problems) {
  const double tol = cfg.tol.value_or(kAxiomTolerance);
  std::vector<std::pair<BatteryRule, std::vector<Verdict>>> runs;
  for (BatteryRule r : battery_rules(cfg)) runs.emplace_back(r, std::vector<Verdict>{});
  Rng rng(cfg.sampling.seed);
  for (std::size_t k = 0; k < problems; ++k) {
    const Problem p = random_problem(rng);
    for (auto& [rule, verdicts] : runs) accumulate(verdicts, run_axiom_battery(rule, p, tol));
  }
  return render_battery(cfg, runs, problems);
}

CommandResult cmd_drop_analysis(const RunConfig& cfg, const ItemTable& table, Measure measure,
                                std::size_t drops_per_group,
                                std::optional<std::vector<std::vector<std::string>>> groups) {
  const Problem p = problem_of(cfg, table);
  const auto partition = groups ? *groups : groups_of(table);
  const CostGame g = CostGame::over_items(p);
  const std::vector<double> values = measure == Measure::Marginal
                                         ? marginal_costs(g)
                                         : shapley_exact(g, cfg.exact_threshold,
                                                         cfg.sampling.threads).values;
  const DropSelection sel = drop_selection(p, partition, values, drops_per_group);

  CommandResult res;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "item,measure,dropped\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& id = p.items()[i].item_id;
      const bool gone = std::find(sel.dropped.begin(), sel.dropped.end(), id) != sel.dropped.end();
      res.output += fmt::format("{},{},{}\n", id, cell(cfg, values[i]), gone ? "true" : "false");
    }
    return res;
  }
  Json j;
  j["measure"] = measure == Measure::Marginal ? "marginal" : "shapley";
  j["drops_per_group"] = drops_per_group;
  j["dropped"] = sel.dropped;
  j["remaining_cost"] = shown(cfg, sel.remaining_cost);
  j["full_cost"] = shown(cfg, g.grand_cost());
  Json m = Json::object();
  for (std::size_t i = 0; i < p.size(); ++i) m[p.items()[i].item_id] = shown(cfg, values[i]);
  j["measures"] = std::move(m);
  res.output = render(j);
  return res;
}

CommandResult cmd_plotdata(const RunConfig& cfg, const ItemTable& table) {
  const Problem p = problem_of(cfg, table);
  const CostGame g = CostGame::over_items(p);
  const std::vector<double> shapley =
      g.size() <= cfg.exact_threshold
          ? shapley_exact(g, cfg.exact_threshold, cfg.sampling.threads).values
          : shapley_sampled(g, cfg.sampling).allocation.values;
  const Allocation hd = hd_proportional(p);

  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (shapley[l] != shapley[r]) return shapley[l] < shapley[r];
    return id_less(p.items()[l].item_id, p.items()[r].item_id);
  });

  CommandResult res;
  if (cfg.format == OutputFormat::Csv) {
    res.output = "rank,shapley,hd_prop\n";
    for (std::size_t k = 0; k < order.size(); ++k) {
      res.output += fmt::format("{},{},{}\n", k + 1, cell(cfg, shapley[order[k]]),
                                cell(cfg, hd.values[order[k]]));
    }
    return res;
  }
  Json rows = Json::array();
  for (std::size_t k = 0; k < order.size(); ++k) {
    rows.push_back({{"rank", k + 1},
                    {"item", p.items()[order[k]].item_id},
                    {"shapley", shown(cfg, shapley[order[k]])},
                    {"hd_prop", shown(cfg, hd.values[order[k]])}});
  }
  res.output = render(Json{{"rows", std::move(rows)}});
  return res;
}

}  // namespace eoq::cli
