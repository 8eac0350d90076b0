#include "eoq/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "eoq/error.hpp"

namespace eoq {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_positive(std::string_view cell, std::size_t line, std::string_view field) {
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc{} || ptr != end) {
    throw ValidationError(fmt::format("line {}: field '{}' is not a number: '{}'", line, field, cell));
  }
  if (!std::isfinite(value) || value <= 0.0) {
    throw ValidationError(
        fmt::format("line {}: field '{}' must be positive and finite (got {})", line, field, cell));
  }
  return value;
}

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

bool ItemTable::has_firms() const {
  return std::any_of(rows.begin(), rows.end(), [](const ItemRow& r) { return !r.firm.empty(); });
}

bool ItemTable::has_groups() const {
  return std::any_of(rows.begin(), rows.end(), [](const ItemRow& r) { return !r.group.empty(); });
}

ItemTable parse_items(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  ItemTable table;
  std::optional<std::unordered_map<std::string, std::size_t>> columns;
  std::size_t width = 0;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t blank_firms = 0;
  std::size_t blank_groups = 0;

  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line =
        trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto cells = split(line, ',');
    if (!columns) {
      columns.emplace();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string name(cells[i]);
        if (name != "item" && name != "firm" && name != "group" && name != "d" && name != "h" &&
            name != "c") {
          throw ValidationError(fmt::format("line {}: unknown column '{}' (expected header "
                                            "item,firm,group,d,h,c)", line_no, name));
        }
        if (!columns->emplace(name, i).second) {
          throw ValidationError(fmt::format("line {}: duplicate column '{}'", line_no, name));
        }
      }
      for (const char* required : {"item", "d", "h", "c"}) {
        if (!columns->contains(required)) {
          throw ValidationError(fmt::format(
              "line {}: missing header column '{}' (expected item,firm,group,d,h,c)", line_no,
              required));
        }
      }
      width = cells.size();
      table.has_firm_column = columns->contains("firm");
      table.has_group_column = columns->contains("group");
      continue;
    }

    if (cells.size() != width) {
      throw ValidationError(
          fmt::format("line {}: expected {} fields, found {}", line_no, width, cells.size()));
    }
    const auto cell = [&](const char* name) -> std::string_view {
      auto it = columns->find(name);
      return it == columns->end() ? std::string_view{} : cells[it->second];
    };
    ItemRow row;
    row.item = std::string(cell("item"));
    if (row.item.empty()) throw ValidationError(fmt::format("line {}: field 'item' is blank", line_no));
    if (!ids.insert(row.item).second) {
      throw ValidationError(fmt::format("line {}: duplicate item id '{}'", line_no, row.item));
    }
    row.firm = std::string(cell("firm"));
    row.group = std::string(cell("group"));
    row.d = parse_positive(cell("d"), line_no, "d");
    row.h = parse_positive(cell("h"), line_no, "h");
    row.c = parse_positive(cell("c"), line_no, "c");
    blank_firms += row.firm.empty() ? 1 : 0;
    blank_groups += row.group.empty() ? 1 : 0;
    table.rows.push_back(std::move(row));
  }

  if (!columns) throw ValidationError("missing header row item,firm,group,d,h,c");
  if (table.rows.empty()) throw ValidationError("no item rows");
  if (blank_firms != 0 && blank_firms != table.rows.size()) {
    throw ValidationError("column 'firm' must be blank on every row or filled on every row");
  }
  if (blank_groups != 0 && blank_groups != table.rows.size()) {
    throw ValidationError("column 'group' must be blank on every row or filled on every row");
  }
  return table;
}

ItemTable read_items_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_items(buf.str());
}

std::string serialize_items(const ItemTable& table) {
  std::string out = "item";
  if (table.has_firm_column) out += ",firm";
  if (table.has_group_column) out += ",group";
  out += ",d,h,c\n";
  for (const auto& r : table.rows) {
    out += r.item;
    if (table.has_firm_column) out += "," + r.firm;
    if (table.has_group_column) out += "," + r.group;
    out += fmt::format(",{},{},{}\n", shortest(r.d), shortest(r.h), shortest(r.c));
  }
  return out;
}

Problem to_problem(const ItemTable& table, double ordering_cost, double exemption_price) {
  std::vector<ItemRecord> items;
  items.reserve(table.rows.size());
  for (const auto& r : table.rows) items.push_back({r.item, r.firm, r.d, r.h, r.c});
  return Problem(std::move(items), ordering_cost, exemption_price);
}

std::vector<std::vector<std::string>> groups_of(const ItemTable& table) {
  if (!table.has_groups()) throw ValidationError("the item table has no group column values");
  std::vector<std::vector<std::string>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : table.rows) {
    auto [it, inserted] = index.emplace(r.group, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(r.item);
  }
  return groups;
}

std::vector<std::vector<std::string>> parse_groups(std::string_view text) {
  std::vector<std::vector<std::string>> groups;
  for (auto part : split(text, ';')) {
    if (part.empty()) continue;
    std::vector<std::string> ids;
    for (auto id : split(part, ',')) {
      if (id.empty()) throw ValidationError(fmt::format("empty item id in groups '{}'", text));
      ids.emplace_back(id);
    }
    groups.push_back(std::move(ids));
  }
  if (groups.empty()) throw ValidationError("groups specification is empty");
  return groups;
}

}  // namespace eoq
