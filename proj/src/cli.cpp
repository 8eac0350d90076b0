#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "eoq/commands.hpp"
#include "eoq/error.hpp"

namespace eoq::cli {
namespace {

struct InputOptions {
  std::string path;
  std::string fixture;
  std::optional<double> a;
  std::optional<double> b;
};

void add_input(CLI::App& cmd, InputOptions& in) {
  cmd.add_option("input,--input", in.path, "Item CSV (item,firm,group,d,h,c)");
  cmd.add_option("--fixture", in.fixture, "Bundled data set instead of a file");
  cmd.add_option("--a", in.a, "Ordering cost per order");
  cmd.add_option("--B", in.b, "Order price at which the ordering cost is waived");
}

void add_output(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--format", cfg.format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, OutputFormat>{{"json", OutputFormat::Json},
                                              {"csv", OutputFormat::Csv}},
          CLI::ignore_case));
  cmd.add_flag("--full-precision", cfg.full_precision, "Shortest round-trip numbers");
}

void add_rule(CLI::App& cmd, std::string& rule) {
  cmd.add_option("--rule", rule, "shapley-exact | shapley-sampled | hd | sp");
}

void add_sampling(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--samples", cfg.sampling.sample_count, "Sampled permutations")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--seed", cfg.sampling.seed, "Random seed");
  cmd.add_option("--threads", cfg.sampling.threads, "Worker threads (0 = all cores)");
  cmd.add_option("--exact-threshold", cfg.exact_threshold, "Largest game solved exactly");
}

// Loads the table and fills a and B, falling back to the fixture's values.
ItemTable load(const InputOptions& in, RunConfig& cfg) {
  if (!in.path.empty() && !in.fixture.empty()) {
    throw ValidationError("give either an input file or --fixture, not both");
  }
  ItemTable table;
  std::optional<double> a = in.a;
  std::optional<double> b = in.b;
  if (!in.fixture.empty()) {
    const Fixture& f = fixture(in.fixture);
    table = parse_items(f.csv);
    if (!a) a = f.ordering_cost;
    if (!b) b = f.exemption_price;
  } else if (!in.path.empty()) {
    table = read_items_file(in.path);
  } else {
    throw ValidationError("no input: give a CSV file or --fixture");
  }
  if (!a) throw ValidationError("missing --a (ordering cost)");
  if (!b) throw ValidationError("missing --B (exemption price)");
  cfg.ordering_cost = *a;
  cfg.exemption_price = *b;
  return table;
}

std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> ids;
  std::stringstream ss(text);
  for (std::string id; std::getline(ss, id, ',');) {
    if (!id.empty()) ids.push_back(id);
  }
  return ids;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EOQ joint ordering with exemptable ordering costs: games and cost allocation"};
  app.require_subcommand(1);

  RunConfig cfg;
  InputOptions in;
  std::string rule;
  std::string coalition;
  std::string groups;
  std::string measure = "shapley";
  std::string level = "items";
  std::size_t max_n = 16;
  std::size_t drops = 1;
  std::size_t suite = 0;
  std::string fixture_name;

  auto* optimize = app.add_subcommand("optimize", "Optimal joint policy of a coalition");
  add_input(*optimize, in);
  add_output(*optimize, cfg);
  optimize->add_option("--coalition", coalition, "Comma-separated item ids (default: all)");

  auto* allocate = app.add_subcommand("allocate", "Allocate the grand-coalition cost");
  add_input(*allocate, in);
  add_output(*allocate, cfg);
  add_rule(*allocate, rule);
  add_sampling(*allocate, cfg);

  auto* game = app.add_subcommand("game-export", "Cost of every coalition");
  add_input(*game, in);
  add_output(*game, cfg);
  game->add_option("--max-n", max_n, "Largest item count to export");

  auto* core = app.add_subcommand("core-check", "Is the rule's allocation in the core?");
  add_input(*core, in);
  add_output(*core, cfg);
  add_rule(*core, rule);
  add_sampling(*core, cfg);
  core->add_option("--tol", cfg.tol, "Excess tolerance");
  core->add_option("--level", level, "items | firms")
      ->check(CLI::IsMember({"items", "firms"}));

  auto* axioms = app.add_subcommand("axioms", "Check the axioms of hd and/or sp");
  add_input(*axioms, in);
  add_output(*axioms, cfg);
  add_rule(*axioms, rule);
  axioms->add_option("--tol", cfg.tol, "Violation tolerance");
  axioms->add_option("--seed", cfg.sampling.seed, "Seed of the random suite");
  axioms->add_option("--random-suite", suite, "Check N random problems instead of an input");

  auto* drop = app.add_subcommand("drop-analysis", "Which item to discontinue per group");
  add_input(*drop, in);
  add_output(*drop, cfg);
  add_sampling(*drop, cfg);
  drop->add_option("--measure", measure, "marginal | shapley")
      ->check(CLI::IsMember({"marginal", "shapley"}));
  drop->add_option("--drops", drops, "Items dropped per group");
  drop->add_option("--groups", groups, "Partition such as \"1,2,3;4,5,6\" (default: group column)");

  auto* plot = app.add_subcommand("plotdata", "Shapley and hd series sorted by Shapley value");
  add_input(*plot, in);
  add_output(*plot, cfg);
  add_sampling(*plot, cfg);

  auto* fixtures_cmd = app.add_subcommand("fixtures", "List bundled data sets or print one");
  fixtures_cmd->add_option("name", fixture_name, "Fixture to print as CSV");

  try {
    std::vector<std::string> argv(args.rbegin(), args.rend());
    app.parse(std::move(argv));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (!rule.empty()) cfg.rule = parse_rule(rule);
    CommandResult res;
    if (*fixtures_cmd) {
      if (fixture_name.empty()) {
        for (const auto& f : fixtures()) {
          res.output += fmt::format("{}\ta={} B={}\t{}\n", f.name, f.ordering_cost,
                                    f.exemption_price, f.description);
        }
      } else {
        res.output = std::string(fixture(fixture_name).csv);
      }
    } else if (*axioms && suite > 0) {
      if (!in.path.empty() || !in.fixture.empty()) {
        throw ValidationError("--random-suite does not take an input");
      }
      res = cmd_axiom_suite(cfg, suite);
    } else {
      const ItemTable table = load(in, cfg);
      if (*optimize) {
        const auto ids = split_ids(coalition);
        res = cmd_optimize(cfg, table, ids);
      } else if (*allocate) {
        res = cmd_allocate(cfg, table);
      } else if (*game) {
        res = cmd_game_export(cfg, table, max_n);
      } else if (*core) {
        res = cmd_core_check(cfg, table, level == "firms" ? CoreLevel::Firms : CoreLevel::Items);
      } else if (*axioms) {
        res = cmd_axioms(cfg, table);
      } else if (*drop) {
        std::optional<std::vector<std::vector<std::string>>> partition;
        if (!groups.empty()) partition = parse_groups(groups);
        res = cmd_drop_analysis(cfg, table,
                                measure == "marginal" ? Measure::Marginal : Measure::Shapley,
                                drops, std::move(partition));
      } else if (*plot) {
        res = cmd_plotdata(cfg, table);
      }
    }
    out << res.output;
    return res.exit_code;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitValidation;
}

}  // namespace eoq::cli
