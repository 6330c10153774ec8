#include "fcsp/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fcsp/error.hpp"

namespace fcsp {

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_expr(std::ostream& os, const LinearModel& m, const Terms& terms) {
  if (terms.empty()) {
    os << " 0 " << m.col(0).name;
    return;
  }
  int on_line = 0;
  for (const auto& [j, v] : terms) {
    os << (v < 0 ? " - " : " + ") << num17(std::abs(v)) << " " << m.col(j).name;
    if (++on_line % 6 == 0) os << "\n  ";
  }
}

}  // namespace

std::string indexed_name(const std::string& symbol, const std::vector<int>& key) {
  std::string s = symbol;
  s.push_back('(');
  for (size_t k = 0; k < key.size(); ++k) {
    if (k) s.push_back(',');
    s += std::to_string(key[k]);
  }
  s.push_back(')');
  return s;
}

int LinearModel::add_column(std::string name, double lb, double ub, double cost, VarType type) {
  if (type == VarType::Binary) {
    lb = std::max(lb, 0.0);
    ub = std::min(ub, 1.0);
  }
  cols_.push_back(Column{std::move(name), lb, ub, cost, type});
  return num_cols() - 1;
}

int LinearModel::add_row(std::string name, const Terms& terms, double lb, double ub,
                         std::string tag) {
  Terms merged = terms;
  std::sort(merged.begin(), merged.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  size_t w = 0;
  for (size_t r = 0; r < merged.size(); ++r) {
    if (merged[r].first < 0 || merged[r].first >= num_cols())
      throw Error(ErrorKind::InvalidParams, "row " + name + " references a missing column");
    if (w > 0 && merged[w - 1].first == merged[r].first) {
      merged[w - 1].second += merged[r].second;
    } else {
      merged[w++] = merged[r];
    }
  }
  merged.resize(w);
  for (const auto& [j, v] : merged) {
    if (v == 0.0) continue;
    index_.push_back(j);
    value_.push_back(v);
  }
  starts_.push_back(static_cast<int>(index_.size()));
  rows_.push_back(Row{std::move(name), lb, ub, std::move(tag)});
  return num_rows() - 1;
}

Terms LinearModel::row_terms(int i) const {
  Terms t;
  for (int k = starts_.at(i); k < starts_.at(i + 1); ++k) t.emplace_back(index_[k], value_[k]);
  return t;
}

void LinearModel::set_bounds(int j, double lb, double ub) {
  cols_.at(j).lb = lb;
  cols_.at(j).ub = ub;
}

bool LinearModel::is_mip() const {
  return std::any_of(cols_.begin(), cols_.end(),
                     [](const Column& c) { return c.type != VarType::Continuous; });
}

void LinearModel::relax_integrality() {
  for (Column& c : cols_) c.type = VarType::Continuous;
}

double LinearModel::objective_value(const std::vector<double>& x) const {
  double v = offset_;
  for (int j = 0; j < num_cols(); ++j) v += cols_[j].cost * x.at(j);
  return v;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_cols(); ++j) {
    worst = std::max({worst, cols_[j].lb - x.at(j), x.at(j) - cols_[j].ub});
  }
  for (int i = 0; i < num_rows(); ++i) {
    double a = 0.0;
    for (int k = starts_[i]; k < starts_[i + 1]; ++k) a += value_[k] * x.at(index_[k]);
    worst = std::max({worst, rows_[i].lb - a, a - rows_[i].ub});
  }
  return worst;
}

void LinearModel::validate() const {
  for (const Column& c : cols_) {
    if (std::isnan(c.lb) || std::isnan(c.ub) || c.lb > c.ub || c.lb == kInf || c.ub == -kInf)
      throw Error(ErrorKind::InvalidParams, "column " + c.name + " has invalid bounds");
    if (!std::isfinite(c.cost)) throw Error(ErrorKind::NonFiniteValue, "column " + c.name + " cost");
    if (c.type == VarType::Binary && (c.lb < 0.0 || c.ub > 1.0))
      throw Error(ErrorKind::InvalidParams, "binary " + c.name + " outside [0,1]");
  }
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    if (std::isnan(r.lb) || std::isnan(r.ub) || r.lb > r.ub)
      throw Error(ErrorKind::InvalidParams, "row " + r.name + " has invalid bounds");
    for (int k = starts_[i]; k < starts_[i + 1]; ++k)
      if (!std::isfinite(value_[k]))
        throw Error(ErrorKind::NonFiniteValue, "row " + r.name + " has a non-finite coefficient");
  }
  if (!std::isfinite(offset_)) throw Error(ErrorKind::NonFiniteValue, "objective offset");
}

void LinearModel::export_lp(std::ostream& os) const {
  os << "Minimize\n obj:";
  Terms obj;
  for (int j = 0; j < num_cols(); ++j)
    if (cols_[j].cost != 0.0) obj.emplace_back(j, cols_[j].cost);
  if (num_cols() > 0) write_expr(os, *this, obj);
  if (offset_ != 0.0) os << (offset_ < 0 ? " - " : " + ") << num17(std::abs(offset_));
  os << "\nSubject To\n";
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    const Terms t = row_terms(i);
    auto emit = [&](const std::string& name, const char* sense, double rhs) {
      os << " " << name << ":";
      write_expr(os, *this, t);
      os << " " << sense << " " << num17(rhs) << "\n";
    };
    if (r.lb == r.ub) {
      emit(r.name, "=", r.lb);
    } else if (r.lb > -kInf && r.ub < kInf) {
      emit(r.name + "_lo", ">=", r.lb);
      emit(r.name + "_hi", "<=", r.ub);
    } else if (r.lb > -kInf) {
      emit(r.name, ">=", r.lb);
    } else if (r.ub < kInf) {
      emit(r.name, "<=", r.ub);
    }
  }
  os << "Bounds\n";
  for (const Column& c : cols_) {
    if (c.lb == -kInf && c.ub == kInf) {
      os << " " << c.name << " free\n";
    } else if (c.lb == -kInf) {
      os << " -inf <= " << c.name << " <= " << num17(c.ub) << "\n";
    } else if (c.ub == kInf) {
      os << " " << c.name << " >= " << num17(c.lb) << "\n";
    } else {
      os << " " << num17(c.lb) << " <= " << c.name << " <= " << num17(c.ub) << "\n";
    }
  }
  bool any_int = false;
  for (const Column& c : cols_) {
    if (c.type == VarType::Continuous) continue;
    if (!any_int) os << "General\n";
    any_int = true;
    os << " " << c.name << "\n";
  }
  os << "End\n";
}

int VariableRegistry::add(LinearModel& m, const std::string& symbol, const Key& key, double lb,
                          double ub, double cost, VarType type) {
  int j = m.add_column(indexed_name(symbol, key), lb, ub, cost, type);
  bind(symbol, key, j);
  return j;
}

void VariableRegistry::bind(const std::string& symbol, const Key& key, int column) {
  if (!table_[symbol].emplace(key, column).second)
    throw Error(ErrorKind::InvalidParams, "symbol " + indexed_name(symbol, key) + " registered twice");
}

int VariableRegistry::at(const std::string& symbol, const Key& key) const {
  int j = find(symbol, key);
  if (j < 0) throw Error(ErrorKind::InvalidParams, "unknown symbol " + indexed_name(symbol, key));
  return j;
}

int VariableRegistry::find(const std::string& symbol, const Key& key) const {
  auto it = table_.find(symbol);
  if (it == table_.end()) return -1;
  auto jt = it->second.find(key);
  return jt == it->second.end() ? -1 : jt->second;
}

std::vector<std::string> VariableRegistry::symbols() const {
  std::vector<std::string> out;
  for (const auto& [s, m] : table_) out.push_back(s);
  return out;
}

const std::map<VariableRegistry::Key, int>& VariableRegistry::entries(const std::string& symbol) const {
  static const std::map<Key, int> empty;
  auto it = table_.find(symbol);
  return it == table_.end() ? empty : it->second;
}

}  // namespace fcsp
