// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/data.hh"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace crossmi {

Cell Cell::real(double v) {
  if (!std::isfinite(v)) {
    throw TypeMismatchError("real cell must be finite");
  }
  Cell c;
  c.kind_ = Kind::kReal;
  c.real_ = v;
  return c;
}

Cell Cell::category(int index) {
  if (index < 0) {
    throw TypeMismatchError("category index must be non-negative");
  }
  Cell c;
  c.kind_ = Kind::kCategory;
  c.category_ = index;
  return c;
}

double Cell::real_value() const {
  if (kind_ != Kind::kReal) throw TypeMismatchError("cell is not numerical");
  return real_;
}

int Cell::category_value() const {
  if (kind_ != Kind::kCategory) throw TypeMismatchError("cell is not nominal");
  return category_;
}

bool Cell::operator==(const Cell& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::kMissing:
      return true;
    case Kind::kReal:
      return real_ == o.real_;
    case Kind::kCategory:
      return category_ == o.category_;
  }
  return false;
}

std::string Variable::category_label(int index) const {
  if (index >= 0 && static_cast<size_t>(index) < categories.size()) {
    return categories[index];
  }
  return std::to_string(index);
}

std::optional<int> Variable::category_index(const std::string& label) const {
  for (size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

Schema::Schema(std::vector<Variable> variables)
    : variables_(std::move(variables)) {
  for (size_t i = 0; i < variables_.size(); ++i) {
    const Variable& v = variables_[i];
    if (v.name.empty()) throw Error("variable name must be non-empty");
    if (!by_name_.emplace(v.name, static_cast<int>(i)).second) {
      throw Error("duplicate variable name: " + v.name);
    }
    if (v.is_nominal()) {
      if (v.category_count < 2) {
        throw Error("nominal variable needs >= 2 categories: " + v.name);
      }
      if (!v.categories.empty() &&
          v.categories.size() != static_cast<size_t>(v.category_count)) {
        throw Error("category labels do not match category count: " + v.name);
      }
    }
  }
}

const Variable& Schema::variable(int index) const {
  if (index < 0 || static_cast<size_t>(index) >= variables_.size()) {
    throw UnknownVariableError("variable index out of range: " +
                               std::to_string(index));
  }
  return variables_[index];
}

std::optional<int> Schema::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int Schema::require(const std::string& name) const {
  auto idx = index_of(name);
  if (!idx) throw UnknownVariableError("unknown variable: " + name);
  return *idx;
}

void Schema::check_cell(int index, const Cell& cell) const {
  const Variable& v = variable(index);
  if (cell.is_missing()) return;
  if (v.type == StatType::kNumerical) {
    if (!cell.is_real()) {
      throw TypeMismatchError("variable " + v.name + " is numerical");
    }
  } else {
    if (!cell.is_category()) {
      throw TypeMismatchError("variable " + v.name + " is nominal");
    }
    if (cell.category_value() >= v.category_count) {
      throw TypeMismatchError("category index out of range for " + v.name);
    }
  }
}

bool Schema::operator==(const Schema& o) const {
  if (variables_.size() != o.variables_.size()) return false;
  for (size_t i = 0; i < variables_.size(); ++i) {
    const Variable& a = variables_[i];
    const Variable& b = o.variables_[i];
    if (a.name != b.name || a.type != b.type ||
        a.category_count != b.category_count || a.categories != b.categories) {
      return false;
    }
  }
  return true;
}

VarSet::VarSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  auto dup = std::adjacent_find(indices_.begin(), indices_.end());
  if (dup != indices_.end()) {
    throw Error("VarSet indices must be distinct");
  }
  if (!indices_.empty() && indices_.front() < 0) {
    throw Error("VarSet indices must be non-negative");
  }
}

VarSet VarSet::of(std::initializer_list<int> indices) {
  return VarSet(std::vector<int>(indices));
}

bool VarSet::contains(int v) const {
  return std::binary_search(indices_.begin(), indices_.end(), v);
}

VarSet VarSet::set_union(const VarSet& o) const {
  std::vector<int> out;
  std::set_union(indices_.begin(), indices_.end(), o.indices_.begin(),
                 o.indices_.end(), std::back_inserter(out));
  return VarSet(std::move(out));
}

VarSet VarSet::intersect(const VarSet& o) const {
  std::vector<int> out;
  std::set_intersection(indices_.begin(), indices_.end(), o.indices_.begin(),
                        o.indices_.end(), std::back_inserter(out));
  return VarSet(std::move(out));
}

bool VarSet::disjoint(const VarSet& o) const {
  return intersect(o).empty();
}

VarSet keys_of(const Values& values) {
  std::vector<int> idx;
  idx.reserve(values.size());
  for (const auto& [k, v] : values) idx.push_back(k);
  return VarSet(std::move(idx));
}

namespace {

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a_str(uint64_t h, const std::string& s) {
  return fnv1a(h, s.data(), s.size());
}

}  // namespace

Dataset::Dataset(Schema schema, std::vector<std::vector<Cell>> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  const size_t d = schema_.size();
  std::vector<bool> observed(d, false);
  for (const auto& row : rows_) {
    if (row.size() != d) throw Error("row width does not match schema");
    for (size_t j = 0; j < d; ++j) {
      schema_.check_cell(static_cast<int>(j), row[j]);
      if (!row[j].is_missing()) observed[j] = true;
    }
  }
  if (!rows_.empty()) {
    for (size_t j = 0; j < d; ++j) {
      if (!observed[j]) {
        throw Error("variable has no observed cells: " +
                    schema_.variable(static_cast<int>(j)).name);
      }
    }
  }

  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Variable& v : schema_.variables()) {
    h = fnv1a_str(h, v.name);
    const int t = v.type == StatType::kNumerical ? 0 : v.category_count;
    h = fnv1a(h, &t, sizeof(t));
  }
  for (const auto& row : rows_) {
    for (const Cell& c : row) {
      if (c.is_missing()) {
        h = fnv1a(h, "m", 1);
      } else if (c.is_real()) {
        const double x = c.real_value();
        h = fnv1a(h, &x, sizeof(x));
      } else {
        const int x = c.category_value();
        h = fnv1a(h, &x, sizeof(x));
      }
    }
  }
  fingerprint_ = h;
}

const Cell& Dataset::cell(size_t row, int variable) const {
  return rows_.at(row).at(static_cast<size_t>(variable));
}

size_t Dataset::observed_count(int variable) const {
  size_t n = 0;
  for (const auto& row : rows_) {
    if (!row[static_cast<size_t>(variable)].is_missing()) ++n;
  }
  return n;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

namespace {

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::shared_ptr<const Dataset> read_csv(std::istream& in,
                                        const IngestOptions& options,
                                        IngestReport* report) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty csv");
  const std::vector<std::string> names = split_csv_line(line);
  if (names.empty() || (names.size() == 1 && names[0].empty())) {
    throw IngestError("csv header has no columns");
  }
  std::vector<std::vector<std::string>> columns(names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != names.size()) {
      throw IngestError("csv row has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(names.size()));
    }
    for (size_t j = 0; j < fields.size(); ++j) {
      columns[j].push_back(fields[j]);
    }
  }
  if (columns[0].empty()) throw IngestError("csv has no data rows");

  for (const auto& [name, ov] : options.overrides) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw IngestError("override for unknown column: " + name);
    }
  }

  std::vector<Variable> variables;
  std::vector<int> kept;  // original column index per retained variable
  std::vector<double> missing_rate;
  for (size_t j = 0; j < names.size(); ++j) {
    size_t missing = 0;
    bool all_numeric = true;
    std::vector<std::string> distinct;
    for (const std::string& s : columns[j]) {
      if (is_missing_token(s)) {
        ++missing;
        continue;
      }
      if (!parse_number(s)) all_numeric = false;
      if (std::find(distinct.begin(), distinct.end(), s) == distinct.end()) {
        distinct.push_back(s);
      }
    }
    if (missing == columns[j].size()) {
      if (report) report->dropped_columns.push_back(names[j]);
      continue;
    }

    std::optional<StatType> forced;
    auto ov = options.overrides.find(names[j]);
    if (ov != options.overrides.end()) forced = ov->second.forced_type;

    StatType type;
    if (forced) {
      type = *forced;
      if (type == StatType::kNumerical && !all_numeric) {
        throw IngestError("column " + names[j] +
                          " forced numerical but has non-numeric values");
      }
      if (type == StatType::kNominal && distinct.size() < 2) {
        throw IngestError("column " + names[j] +
                          " forced nominal but has fewer than 2 values");
      }
    } else if (all_numeric) {
      type = StatType::kNumerical;
    } else if (distinct.size() <=
               static_cast<size_t>(options.nominal_threshold)) {
      if (distinct.size() < 2) {
        throw IngestError("column " + names[j] +
                          " has a single non-numeric value; nothing to model");
      }
      type = StatType::kNominal;
    } else {
      throw IngestError("column " + names[j] + " has " +
                        std::to_string(distinct.size()) +
                        " distinct non-numeric values (threshold " +
                        std::to_string(options.nominal_threshold) +
                        "); override the type to ingest it");
    }

    Variable v;
    v.name = names[j];
    v.type = type;
    if (type == StatType::kNominal) {
      v.categories = distinct;
      v.category_count = static_cast<int>(distinct.size());
    }
    variables.push_back(std::move(v));
    kept.push_back(static_cast<int>(j));
    missing_rate.push_back(static_cast<double>(missing) /
                           static_cast<double>(columns[j].size()));
  }
  if (variables.empty()) throw IngestError("no retained columns");

  Schema schema(variables);
  const size_t n = columns[kept[0]].size();
  std::vector<std::vector<Cell>> rows(n, std::vector<Cell>(variables.size()));
  for (size_t v = 0; v < kept.size(); ++v) {
    const std::vector<std::string>& col = columns[static_cast<size_t>(kept[v])];
    const Variable& var = variables[v];
    for (size_t i = 0; i < n; ++i) {
      const std::string& s = col[i];
      if (is_missing_token(s)) continue;
      if (var.type == StatType::kNumerical) {
        rows[i][v] = Cell::real(*parse_number(s));
      } else {
        rows[i][v] = Cell::category(*var.category_index(s));
      }
    }
  }
  if (report) report->missing_rate = missing_rate;
  return std::make_shared<Dataset>(std::move(schema), std::move(rows));
}

std::shared_ptr<const Dataset> read_csv_file(const std::string& path,
                                             const IngestOptions& options,
                                             IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read file: " + path);
  return read_csv(in, options, report);
}

std::shared_ptr<const Dataset> read_csv_with_schema(std::istream& in,
                                                    const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty csv");
  const std::vector<std::string> names = split_csv_line(line);
  if (names.size() != schema.size()) {
    throw IngestError("csv width does not match schema");
  }
  for (size_t j = 0; j < names.size(); ++j) {
    if (names[j] != schema.variable(static_cast<int>(j)).name) {
      throw IngestError("csv column order does not match schema");
    }
  }
  std::vector<std::vector<Cell>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != names.size()) {
      throw IngestError("csv row width mismatch");
    }
    std::vector<Cell> row(schema.size());
    for (size_t j = 0; j < fields.size(); ++j) {
      const std::string& s = fields[j];
      if (is_missing_token(s)) continue;
      const Variable& var = schema.variable(static_cast<int>(j));
      if (var.type == StatType::kNumerical) {
        auto v = parse_number(s);
        if (!v) throw IngestError("bad numeric value: " + s);
        row[j] = Cell::real(*v);
      } else {
        auto idx = var.category_index(s);
        if (!idx) throw IngestError("unknown category '" + s + "' for " + var.name);
        row[j] = Cell::category(*idx);
      }
    }
    rows.push_back(std::move(row));
  }
  return std::make_shared<Dataset>(schema, std::move(rows));
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  const Schema& schema = dataset.schema();
  for (size_t j = 0; j < schema.size(); ++j) {
    if (j) out << ',';
    out << schema.variable(static_cast<int>(j)).name;
  }
  out << '\n';
  char buf[64];
  for (const auto& row : dataset.rows()) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      const Cell& c = row[j];
      if (c.is_missing()) {
        out << "NA";
      } else if (c.is_real()) {
        std::snprintf(buf, sizeof(buf), "%.17g", c.real_value());
        out << buf;
      } else {
        out << schema.variable(static_cast<int>(j))
                   .category_label(c.category_value());
      }
    }
    out << '\n';
  }
}

}  // namespace crossmi
