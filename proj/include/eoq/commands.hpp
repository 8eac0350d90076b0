#pragma once

// Command implementations behind the eoqx CLI. Each returns the rendered
// report and the process exit status so they can be driven in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eoq/game.hpp"
#include "eoq/io.hpp"

namespace eoq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitViolation = 2;

enum class OutputFormat { Json, Csv };
enum class RuleKind { ShapleyExact, ShapleySampled, Hd, Sp };
enum class Measure { Marginal, Shapley };

RuleKind parse_rule(std::string_view name);
std::string_view rule_name(RuleKind rule);

struct RunConfig {
  double ordering_cost = 0.0;
  double exemption_price = 0.0;
  std::optional<RuleKind> rule;
  SamplingConfig sampling{100000, 0, 1};
  std::size_t exact_threshold = kDefaultExactThreshold;
  std::size_t enumeration_threshold = kDefaultEnumerationThreshold;
  /// Overrides the command's default tolerance (core 1e-6, axioms 1e-7).
  std::optional<double> tol;
  OutputFormat format = OutputFormat::Json;
  /// Emit shortest round-trip numbers instead of 6 decimals.
  bool full_precision = false;
};

struct CommandResult {
  std::string output;
  int exit_code = kExitOk;
};

/// Optimal joint policy of `coalition` (all items when empty).
CommandResult cmd_optimize(const RunConfig& cfg, const ItemTable& table,
                           std::span<const std::string> coalition = {});

/// Allocation of the grand-coalition cost by the configured rule (default hd).
CommandResult cmd_allocate(const RunConfig& cfg, const ItemTable& table);

/// Every coalition cost as `mask,cost`; bit i is the i-th row.
CommandResult cmd_game_export(const RunConfig& cfg, const ItemTable& table,
                              std::size_t max_n = 16);

enum class CoreLevel { Items, Firms };

/// Core membership of the rule's allocation; exit 2 when outside the core.
CommandResult cmd_core_check(const RunConfig& cfg, const ItemTable& table,
                             CoreLevel level = CoreLevel::Items);

/// Axiom battery for hd and/or sp on the table; exit 2 on any violation.
CommandResult cmd_axioms(const RunConfig& cfg, const ItemTable& table);

/// Axiom battery on `problems` random instances drawn from cfg.sampling.seed.
CommandResult cmd_axiom_suite(const RunConfig& cfg, std::size_t problems);

/// Which items to discontinue per group; groups default to the group column.
CommandResult cmd_drop_analysis(const RunConfig& cfg, const ItemTable& table, Measure measure,
                                std::size_t drops_per_group = 1,
                                std::optional<std::vector<std::vector<std::string>>> groups = {});

/// `rank,shapley,hd_prop`, sorted by Shapley value ascending.
CommandResult cmd_plotdata(const RunConfig& cfg, const ItemTable& table);

/// Full command-line entry point (args exclude the program name).
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace eoq::cli
