#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eoq/core.hpp"

namespace eoq {

/// One CSV row. Blank firm/group cells are empty strings.
struct ItemRow {
  std::string item;
  std::string firm;
  std::string group;
  double d = 0.0;
  double h = 0.0;
  double c = 0.0;

  bool operator==(const ItemRow&) const = default;
};

struct ItemTable {
  std::vector<ItemRow> rows;
  bool has_firm_column = false;
  bool has_group_column = false;

  bool operator==(const ItemTable&) const = default;

  /// True when at least one row names a firm.
  bool has_firms() const;
  bool has_groups() const;
};

/// Parses `item,firm,group,d,h,c` CSV. The header is required; `firm` and
/// `group` columns are optional and columns may appear in any order. Firm
/// and group cells must be either all blank or all filled. Errors carry the
/// 1-based line number and field name.
ItemTable parse_items(std::string_view text);

ItemTable read_items_file(const std::filesystem::path& path);

/// Canonical CSV: header in `item,firm,group,d,h,c` order restricted to the
/// table's columns, numbers in shortest round-trip form.
std::string serialize_items(const ItemTable& table);

/// Builds the problem. Rows without a firm all belong to one implicit firm.
Problem to_problem(const ItemTable& table, double ordering_cost, double exemption_price);

/// Item ids per group, groups in order of first appearance.
std::vector<std::vector<std::string>> groups_of(const ItemTable& table);

/// Parses "1,2,3;4,5;6" into groups of ids.
std::vector<std::vector<std::string>> parse_groups(std::string_view text);

struct Fixture {
  std::string_view name;
  std::string_view description;
  std::string_view csv;
  double ordering_cost;
  double exemption_price;
};

/// Case-study data sets compiled into the library.
std::span<const Fixture> fixtures();
const Fixture& fixture(std::string_view name);

}  // namespace eoq
