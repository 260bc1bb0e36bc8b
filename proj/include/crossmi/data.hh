// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crossmi/errors.hh"

namespace crossmi {

enum class StatType { kNumerical, kNominal };

// One table cell: missing, a finite real, or a category index.
class Cell {
 public:
  Cell() : kind_(Kind::kMissing) {}
  static Cell missing() { return Cell(); }
  static Cell real(double v);
  static Cell category(int index);

  bool is_missing() const { return kind_ == Kind::kMissing; }
  bool is_real() const { return kind_ == Kind::kReal; }
  bool is_category() const { return kind_ == Kind::kCategory; }
  double real_value() const;
  int category_value() const;

  bool operator==(const Cell& o) const;

 private:
  enum class Kind { kMissing, kReal, kCategory };
  Kind kind_;
  double real_ = 0.0;
  int category_ = 0;
};

struct Variable {
  std::string name;
  StatType type = StatType::kNumerical;
  int category_count = 0;             // nominal only, >= 2
  std::vector<std::string> categories;  // optional display labels

  bool is_nominal() const { return type == StatType::kNominal; }
  // Label for a category index; falls back to the index itself.
  std::string category_label(int index) const;
  // Index for a label; nullopt if unknown.
  std::optional<int> category_index(const std::string& label) const;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Variable> variables);

  size_t size() const { return variables_.size(); }
  const Variable& variable(int index) const;
  const std::vector<Variable>& variables() const { return variables_; }
  std::optional<int> index_of(const std::string& name) const;
  int require(const std::string& name) const;  // throws UnknownVariableError

  // Rejects a cell that does not fit variable `index`.
  void check_cell(int index, const Cell& cell) const;

  bool operator==(const Schema& o) const;

 private:
  std::vector<Variable> variables_;
  std::map<std::string, int> by_name_;
};

// Sorted set of distinct variable indices.
class VarSet {
 public:
  VarSet() = default;
  explicit VarSet(std::vector<int> indices);
  static VarSet of(std::initializer_list<int> indices);

  bool empty() const { return indices_.empty(); }
  size_t size() const { return indices_.size(); }
  bool contains(int v) const;
  const std::vector<int>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  VarSet set_union(const VarSet& o) const;
  VarSet intersect(const VarSet& o) const;
  bool disjoint(const VarSet& o) const;

  bool operator==(const VarSet& o) const { return indices_ == o.indices_; }

 private:
  std::vector<int> indices_;
};

// Sparse record of cell values keyed by variable index. Ordered map so
// iteration is deterministic.
using Values = std::map<int, Cell>;

VarSet keys_of(const Values& values);

// Immutable after construction; shared freely across threads.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<std::vector<Cell>> rows);

  const Schema& schema() const { return schema_; }
  size_t row_count() const { return rows_.size(); }
  size_t variable_count() const { return schema_.size(); }
  const Cell& cell(size_t row, int variable) const;
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  size_t observed_count(int variable) const;

  // 64-bit content hash over schema and cells.
  uint64_t fingerprint() const { return fingerprint_; }

 private:
  Schema schema_;
  std::vector<std::vector<Cell>> rows_;
  uint64_t fingerprint_ = 0;
};

struct ColumnOverride {
  std::optional<StatType> forced_type;
};

struct IngestOptions {
  // Above this many distinct values a non-numeric column is rejected
  // rather than treated as nominal.
  int nominal_threshold = 20;
  std::map<std::string, ColumnOverride> overrides;
};

struct IngestReport {
  std::vector<std::string> dropped_columns;  // all cells missing
  std::vector<double> missing_rate;          // per retained variable
};

// CSV with a header row of variable names. Empty string or NA is missing;
// nominal categories are frozen in first-appearance order.
std::shared_ptr<const Dataset> read_csv(std::istream& in,
                                        const IngestOptions& options,
                                        IngestReport* report);
std::shared_ptr<const Dataset> read_csv_file(const std::string& path,
                                             const IngestOptions& options,
                                             IngestReport* report);

// Reads a CSV against an already-frozen schema (column order and nominal
// labels must match); used to reopen a workspace without re-guessing.
std::shared_ptr<const Dataset> read_csv_with_schema(std::istream& in,
                                                    const Schema& schema);

void write_csv(std::ostream& out, const Dataset& dataset);

// One row of raw CSV fields, honoring quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace crossmi
