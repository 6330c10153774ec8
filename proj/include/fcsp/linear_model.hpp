#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fcsp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary, Integer };

struct Column {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double cost = 0.0;
  VarType type = VarType::Continuous;
};

struct Row {
  std::string name;
  double lb = -kInf;
  double ub = kInf;
  std::string tag;  // constraint family, used in reports and audits
};

using Terms = std::vector<std::pair<int, double>>;

// Minimization MILP/LP held in row-wise sparse form.
class LinearModel {
 public:
  int add_column(std::string name, double lb, double ub, double cost = 0.0,
                 VarType type = VarType::Continuous);
  int add_row(std::string name, const Terms& terms, double lb, double ub, std::string tag = {});
  int add_le(std::string name, const Terms& terms, double rhs, std::string tag = {}) {
    return add_row(std::move(name), terms, -kInf, rhs, std::move(tag));
  }
  int add_ge(std::string name, const Terms& terms, double rhs, std::string tag = {}) {
    return add_row(std::move(name), terms, rhs, kInf, std::move(tag));
  }
  int add_eq(std::string name, const Terms& terms, double rhs, std::string tag = {}) {
    return add_row(std::move(name), terms, rhs, rhs, std::move(tag));
  }

  int num_cols() const { return static_cast<int>(cols_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Column& col(int j) const { return cols_.at(j); }
  Column& col(int j) { return cols_.at(j); }
  const Row& row(int i) const { return rows_.at(i); }
  const std::vector<Column>& cols() const { return cols_; }
  const std::vector<Row>& rows() const { return rows_; }

  // Row i occupies [row_start(i), row_start(i+1)) of indices()/values().
  int row_start(int i) const { return starts_.at(i); }
  const std::vector<int>& indices() const { return index_; }
  const std::vector<double>& values() const { return value_; }
  Terms row_terms(int i) const;

  void set_cost(int j, double c) { cols_.at(j).cost = c; }
  void add_cost(int j, double c) { cols_.at(j).cost += c; }
  void set_bounds(int j, double lb, double ub);
  double offset() const { return offset_; }
  void add_offset(double v) { offset_ += v; }

  bool is_mip() const;
  void relax_integrality();

  double objective_value(const std::vector<double>& x) const;
  // Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const;

  // Throws on dangling indices, non-finite coefficients or inverted bounds.
  void validate() const;

  // CPLEX LP text format; numbers printed with 17 significant digits.
  void export_lp(std::ostream& os) const;

 private:
  std::vector<Column> cols_;
  std::vector<Row> rows_;
  std::vector<int> starts_{0};
  std::vector<int> index_;
  std::vector<double> value_;
  double offset_ = 0.0;
};

// Indexed symbol table: one column per (symbol, index tuple).
class VariableRegistry {
 public:
  using Key = std::vector<int>;

  int add(LinearModel& m, const std::string& symbol, const Key& key, double lb, double ub,
          double cost = 0.0, VarType type = VarType::Continuous);
  // Registers an existing column under a symbol.
  void bind(const std::string& symbol, const Key& key, int column);
  int at(const std::string& symbol, const Key& key) const;
  int find(const std::string& symbol, const Key& key) const;  // -1 if absent
  bool has_symbol(const std::string& symbol) const { return table_.count(symbol) > 0; }
  std::vector<std::string> symbols() const;
  const std::map<Key, int>& entries(const std::string& symbol) const;

 private:
  std::map<std::string, std::map<Key, int>> table_;
};

std::string indexed_name(const std::string& symbol, const std::vector<int>& key);

}  // namespace fcsp
