#pragma once

// Executable checks of the properties that characterize the allocation
// rules. Each check evaluates a rule on concrete problems and reports every
// instance where the property fails by more than the tolerance.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eoq/core.hpp"
#include "eoq/rng.hpp"
#include "eoq/rules.hpp"

namespace eoq {

/// Whether a property is read over items (each item its own player) or over
/// firms (players are firms, values are firm totals, H is the firm's sum).
enum class PlayerLevel { Items, Firms };

inline constexpr double kDefaultAxiomTolerance = 1e-7;

struct Violation {
  std::vector<std::string> players;
  double magnitude;
  std::string detail;
};

struct Verdict {
  Verdict() = default;
  explicit Verdict(std::string name) : property(std::move(name)) {}

  std::string property;
  bool holds = true;
  std::uint64_t checks = 0;
  std::vector<Violation> violations;

  void record(bool ok, std::vector<std::string> players, double magnitude, std::string detail);
  void absorb(const Verdict& other);
};

/// Players with equal H (relative 1e-12) receive equal amounts.
Verdict check_symmetry(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                       double tol = kDefaultAxiomTolerance);

/// Every player receives at least -tol.
Verdict check_non_negativity(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                             double tol = kDefaultAxiomTolerance);

/// H_i > H_j implies value_i >= value_j - tol.
Verdict check_hd_ranking_preservation(const AllocationRule& rule, const Problem& p,
                                      PlayerLevel level, double tol = kDefaultAxiomTolerance);

/// Every nonempty coalition of players pays at most its stand-alone cost.
Verdict check_stability(const AllocationRule& rule, const Problem& p, PlayerLevel level,
                        double tol = kDefaultAxiomTolerance,
                        std::size_t enumeration_threshold = kDefaultEnumerationThreshold);

inline Verdict check_stability_for_firms(const AllocationRule& rule, const Problem& p,
                                         double tol = kDefaultAxiomTolerance,
                                         std::size_t threshold = kDefaultEnumerationThreshold) {
  return check_stability(rule, p, PlayerLevel::Firms, tol, threshold);
}

/// For items i, j of the same firm: removing j changes i's value exactly as
/// removing i changes j's.
Verdict check_balanced_contributions(const AllocationRule& rule, const Problem& p,
                                     double tol = kDefaultAxiomTolerance);

/// `absorbed` players merge into `absorber`.
struct MergeSpec {
  PlayerLevel level = PlayerLevel::Items;
  std::string absorber;
  std::vector<std::string> absorbed;
};

/// The merged problem. The absorbed players disappear; the absorber becomes a
/// single item with d = 1, h = H', c = C' (H', C' the merged sums), keeping
/// the absorber's id and firm. At firm level the item takes the id of the
/// absorber firm's first item.
Problem merged_problem(const Problem& p, const MergeSpec& m);

struct NonManipulabilityVerdict {
  Verdict merge;   // merged player receives what the merging players received
  Verdict strong;  // untouched players keep their values
  bool holds() const { return merge.holds && strong.holds; }
};

NonManipulabilityVerdict check_non_manipulability(const AllocationRule& rule, const Problem& p,
                                                  const MergeSpec& m,
                                                  double tol = kDefaultAxiomTolerance);

struct RandomProblemOptions {
  std::size_t min_items = 1;
  std::size_t max_items = 8;
  std::size_t max_firms = 3;
  /// Chance that an item copies an earlier item's (d, h), creating equal H.
  double tie_probability = 0.25;
  /// Chance that the last firm mirrors the first firm's H (fresh c values),
  /// skipped when the mirror would exceed max_items.
  double mirror_firm_probability = 0.25;
};

/// Random valid problem. The exemption price is drawn around the grand
/// coalition's branch boundary so both cost branches occur.
Problem random_problem(Rng& rng, const RandomProblemOptions& options = {});

enum class BatteryRule { Hd, ShapleyProportional };

/// Runs the properties that characterize the rule: for hd the item-level
/// symmetry, non-negativity, non-manipulability (merge and strong forms),
/// hd-ranking preservation and stability; for sp the firm-level versions
/// plus balanced contributions. Non-manipulability is tried for every
/// absorber/absorbed pair and for one merge of all players into the first.
std::vector<Verdict> run_axiom_battery(BatteryRule which, const Problem& p,
                                       double tol = kDefaultAxiomTolerance);

}  // namespace eoq
