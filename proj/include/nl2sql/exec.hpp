#pragma once

// Minimal in-memory evaluator for the SQL subset: inner joins via ON
// equality, WHERE filtering, GROUP BY with aggregates, stable ORDER BY,
// LIMIT truncation. No NULLs; joins are evaluated left to right with each ON
// condition applied as soon as both sides are in scope.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/schema.hpp"
#include "nl2sql/serialize.hpp"

namespace nl2sql {

using Value = std::variant<std::int64_t, double, std::string, bool>;

inline ColumnType value_type(const Value& v) {
  switch (v.index()) {
    case 0: return ColumnType::Int;
    case 1: return ColumnType::Real;
    case 2: return ColumnType::Text;
    default: return ColumnType::Bool;
  }
}

inline bool is_numeric(const Value& v) { return v.index() == 0 || v.index() == 1; }

inline double as_real(const Value& v) {
  if (v.index() == 0) return static_cast<double>(std::get<std::int64_t>(v));
  return std::get<double>(v);
}

// Equality with int/real promotion; other cross-type comparisons are false.
inline bool value_equals(const Value& a, const Value& b) {
  if (a.index() == b.index()) return a == b;
  if (is_numeric(a) && is_numeric(b)) return as_real(a) == as_real(b);
  return false;
}

struct Relation {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Database {
  // table name (original spelling) -> relation; column types per table
  std::map<std::string, Relation> relations;
  std::map<std::string, std::vector<ColumnType>> column_types;

  DataModelSchema schema() const {
    DataModelSchema s;
    for (const auto& [name, rel] : relations) {
      TableDef table;
      table.name = name;
      const auto& types = column_types.at(name);
      for (std::size_t i = 0; i < rel.columns.size(); ++i) {
        table.columns.push_back(ColumnDef{rel.columns[i], types[i]});
      }
      s.tables.push_back(std::move(table));
    }
    return s;
  }
};

namespace detail {

// SQL LIKE with % (any run) and _ (any one char); matching is case-sensitive.
inline bool like_match(const std::string& text, const std::string& pattern, std::size_t ti = 0,
                       std::size_t pi = 0) {
  while (pi < pattern.size()) {
    char pc = pattern[pi];
    if (pc == '%') {
      for (std::size_t skip = ti; skip <= text.size(); ++skip) {
        if (like_match(text, pattern, skip, pi + 1)) return true;
      }
      return false;
    }
    if (ti >= text.size()) return false;
    if (pc != '_' && pc != text[ti]) return false;
    ++ti;
    ++pi;
  }
  return ti == text.size();
}

inline int compare_values(const Value& a, const Value& b) {
  if (is_numeric(a) && is_numeric(b)) {
    double x = as_real(a), y = as_real(b);
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
  }
  if (a.index() != b.index()) {
    throw TypeError("cannot compare " + std::string(column_type_name(value_type(a))) + " with " +
                    std::string(column_type_name(value_type(b))));
  }
  if (a.index() == 2) {
    const auto& x = std::get<std::string>(a);
    const auto& y = std::get<std::string>(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  bool x = std::get<bool>(a), y = std::get<bool>(b);
  return static_cast<int>(x) - static_cast<int>(y);
}

inline bool apply_compare(const Value& lhs, CompareOp op, const Value& rhs) {
  if (op == CompareOp::Like) {
    if (lhs.index() != 2 || rhs.index() != 2) throw TypeError("LIKE requires text operands");
    return like_match(std::get<std::string>(lhs), std::get<std::string>(rhs));
  }
  if (op == CompareOp::Eq || op == CompareOp::Ne) {
    if (!is_numeric(lhs) || !is_numeric(rhs)) {
      if (lhs.index() != rhs.index()) {
        throw TypeError("cannot compare " + std::string(column_type_name(value_type(lhs))) +
                        " with " + std::string(column_type_name(value_type(rhs))));
      }
    }
    bool eq = value_equals(lhs, rhs);
    return op == CompareOp::Eq ? eq : !eq;
  }
  if (lhs.index() == 3 || rhs.index() == 3) {
    throw TypeError("ordering comparisons are not defined for bool");
  }
  int c = compare_values(lhs, rhs);
  switch (op) {
    case CompareOp::Lt: return c < 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Ge: return c >= 0;
    default: return false;
  }
}

// Joined working relation: each slot is (table index in query scope, column).
struct WorkingRel {
  struct Slot {
    std::size_t scope_index;
    std::string column_lower;
    std::string column_name;
    ColumnType type;
  };
  std::vector<Slot> slots;
  std::vector<std::vector<Value>> rows;

  std::optional<std::size_t> resolve(const ColumnRef& ref,
                                     const std::vector<std::string>& scope_lowers) const {
    std::string col = to_lower(ref.column);
    if (ref.table) {
      std::string tbl = to_lower(*ref.table);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (scope_lowers[slots[s].scope_index] == tbl && slots[s].column_lower == col) return s;
      }
      return std::nullopt;
    }
    std::optional<std::size_t> found;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (slots[s].column_lower == col) {
        if (found) return std::nullopt;  // ambiguous
        found = s;
      }
    }
    return found;
  }
};

struct AggSpec {
  AggFunc func = AggFunc::Count;
  std::optional<std::size_t> slot;  // nullopt for COUNT(*)
};

inline Value aggregate_over(const AggSpec& spec, const WorkingRel& rel,
                            const std::vector<std::size_t>& member_rows) {
  if (spec.func == AggFunc::Count) {
    return static_cast<std::int64_t>(member_rows.size());  // no NULLs: COUNT(col) == COUNT(*)
  }
  if (member_rows.empty()) {
    throw SemanticError(std::string(agg_func_name(spec.func)) + " over an empty set");
  }
  const std::size_t slot = *spec.slot;
  if (spec.func == AggFunc::Sum || spec.func == AggFunc::Avg) {
    bool all_int = true;
    double total = 0.0;
    std::int64_t int_total = 0;
    for (std::size_t r : member_rows) {
      const Value& v = rel.rows[r][slot];
      if (!is_numeric(v)) {
        throw TypeError(std::string(agg_func_name(spec.func)) + " requires a numeric column");
      }
      if (v.index() == 0) {
        int_total += std::get<std::int64_t>(v);
      } else {
        all_int = false;
      }
      total += as_real(v);
    }
    if (spec.func == AggFunc::Avg) return total / static_cast<double>(member_rows.size());
    if (all_int) return int_total;
    return total;
  }
  // MIN / MAX over any ordered type
  Value best = rel.rows[member_rows[0]][slot];
  for (std::size_t i = 1; i < member_rows.size(); ++i) {
    const Value& v = rel.rows[member_rows[i]][slot];
    if (v.index() == 3 || best.index() == 3) {
      throw TypeError("MIN/MAX is not defined for bool");
    }
    int c = compare_values(v, best);
    if ((spec.func == AggFunc::Min && c < 0) || (spec.func == AggFunc::Max && c > 0)) best = v;
  }
  return best;
}

inline bool eval_bool(const BoolExpr& e, const WorkingRel& rel,
                      const std::vector<std::string>& scope_lowers,
                      const std::vector<Value>& row) {
  if (e.kind == BoolExpr::Kind::Comparison) {
    const Comparison& cmp = *e.cmp;
    auto lhs_slot = rel.resolve(cmp.lhs, scope_lowers);
    if (!lhs_slot) throw SchemaMismatchError("cannot resolve column in WHERE");
    const Value& lhs = row[*lhs_slot];
    if (const auto* lit = std::get_if<Literal>(&cmp.rhs)) {
      Value rhs = std::visit([](const auto& v) -> Value { return v; }, lit->value);
      return apply_compare(lhs, cmp.op, rhs);
    }
    auto rhs_slot = rel.resolve(std::get<ColumnRef>(cmp.rhs), scope_lowers);
    if (!rhs_slot) throw SchemaMismatchError("cannot resolve column in WHERE");
    return apply_compare(lhs, cmp.op, row[*rhs_slot]);
  }
  bool lhs = eval_bool(e.children[0], rel, scope_lowers, row);
  bool rhs = eval_bool(e.children[1], rel, scope_lowers, row);
  return e.kind == BoolExpr::Kind::And ? (lhs && rhs) : (lhs || rhs);
}

}  // namespace detail

inline Relation execute(const SqlAst& ast, const Database& db) {
  // precondition: the query validates against the database schema
  DataModelSchema schema = db.schema();
  CompiledSchema compiled(schema);
  if (!validate_against_schema(ast, compiled).empty()) {
    throw SchemaMismatchError("query does not validate against the database schema");
  }

  // working scope: FROM table then join tables, in query order
  std::vector<std::string> scope_names = scope_tables(ast);
  std::vector<std::string> scope_lowers;
  for (const auto& name : scope_names) scope_lowers.push_back(to_lower(name));

  auto find_relation = [&db](const std::string& name) -> std::pair<const Relation*, const std::vector<ColumnType>*> {
    for (const auto& [tbl, rel] : db.relations) {
      if (iequals(tbl, name)) return {&rel, &db.column_types.at(tbl)};
    }
    throw SchemaMismatchError("table '" + name + "' not found in database");
  };

  detail::WorkingRel work;
  auto [base_rel, base_types] = find_relation(scope_names[0]);
  for (std::size_t c = 0; c < base_rel->columns.size(); ++c) {
    work.slots.push_back({0, to_lower(base_rel->columns[c]), base_rel->columns[c], (*base_types)[c]});
  }
  work.rows = base_rel->rows;

  // Left-to-right joins; each ON condition applies once both sides resolve.
  std::vector<const Join*> pending;
  for (const auto& join : ast.joins) pending.push_back(&join);
  std::size_t joined = 0;
  for (const auto& join : ast.joins) {
    ++joined;
    auto [rel, types] = find_relation(join.table);
    for (std::size_t c = 0; c < rel->columns.size(); ++c) {
      work.slots.push_back({joined, to_lower(rel->columns[c]), rel->columns[c], (*types)[c]});
    }
    std::vector<std::vector<Value>> product;
    for (const auto& left : work.rows) {
      for (const auto& right : rel->rows) {
        std::vector<Value> row = left;
        row.insert(row.end(), right.begin(), right.end());
        product.push_back(std::move(row));
      }
    }
    work.rows = std::move(product);
    // apply every pending ON condition whose columns are now resolvable
    for (auto it = pending.begin(); it != pending.end();) {
      auto l = work.resolve((*it)->on_left, scope_lowers);
      auto r = work.resolve((*it)->on_right, scope_lowers);
      if (!l || !r) {
        ++it;
        continue;
      }
      std::vector<std::vector<Value>> kept;
      for (auto& row : work.rows) {
        if (value_equals(row[*l], row[*r])) kept.push_back(std::move(row));
      }
      work.rows = std::move(kept);
      it = pending.erase(it);
    }
  }
  if (!pending.empty()) {
    throw SemanticError("join condition references columns outside the joined tables");
  }

  if (ast.where) {
    std::vector<std::vector<Value>> kept;
    for (auto& row : work.rows) {
      if (detail::eval_bool(*ast.where, work, scope_lowers, row)) kept.push_back(std::move(row));
    }
    work.rows = std::move(kept);
  }

  // classify select items
  struct OutputCol {
    std::string name;
    bool is_aggregate = false;
    std::size_t slot = 0;        // plain column
    detail::AggSpec agg;         // aggregate
  };
  std::vector<OutputCol> outputs;
  bool any_aggregate = false;
  auto make_agg = [&](const Aggregate& agg) {
    detail::AggSpec spec;
    spec.func = agg.func;
    if (const auto* ref = std::get_if<ColumnRef>(&agg.arg)) {
      auto slot = work.resolve(*ref, scope_lowers);
      if (!slot) throw SchemaMismatchError("cannot resolve aggregate argument");
      spec.slot = slot;
    }
    return spec;
  };
  auto agg_name = [](const Aggregate& agg) {
    std::string inner = "*";
    if (const auto* ref = std::get_if<ColumnRef>(&agg.arg)) {
      inner = ref->table ? *ref->table + "." + ref->column : ref->column;
    }
    return std::string(agg_func_name(agg.func)) + "(" + inner + ")";
  };
  for (const auto& item : ast.select_items) {
    if (std::holds_alternative<Star>(item)) {
      for (std::size_t s = 0; s < work.slots.size(); ++s) {
        outputs.push_back({work.slots[s].column_name, false, s, {}});
      }
    } else if (const auto* ref = std::get_if<ColumnRef>(&item)) {
      auto slot = work.resolve(*ref, scope_lowers);
      if (!slot) throw SchemaMismatchError("cannot resolve select column");
      outputs.push_back({work.slots[*slot].column_name, false, *slot, {}});
    } else {
      const auto& agg = std::get<Aggregate>(item);
      OutputCol out;
      out.name = agg_name(agg);
      out.is_aggregate = true;
      out.agg = make_agg(agg);
      outputs.push_back(std::move(out));
      any_aggregate = true;
    }
  }

  // group-by slots
  std::vector<std::size_t> group_slots;
  for (const auto& ref : ast.group_by) {
    auto slot = work.resolve(ref, scope_lowers);
    if (!slot) throw SchemaMismatchError("cannot resolve GROUP BY column");
    group_slots.push_back(*slot);
  }
  const bool grouped = !group_slots.empty() || any_aggregate;
  if (grouped) {
    for (const auto& out : outputs) {
      if (out.is_aggregate) continue;
      bool in_group = false;
      for (std::size_t g : group_slots) {
        if (g == out.slot) in_group = true;
      }
      if (!in_group) {
        throw SemanticError("non-aggregate select item '" + out.name +
                            "' must appear in GROUP BY");
      }
    }
  }

  // order-by keys are computed per result row below
  struct OrderKey {
    bool is_aggregate = false;
    std::size_t slot = 0;
    detail::AggSpec agg;
    bool descending = false;
  };
  std::vector<OrderKey> order_keys;
  for (const auto& item : ast.order_by) {
    OrderKey key;
    key.descending = item.dir == SortDir::Desc;
    if (const auto* ref = std::get_if<ColumnRef>(&item.expr)) {
      auto slot = work.resolve(*ref, scope_lowers);
      if (!slot) throw SchemaMismatchError("cannot resolve ORDER BY column");
      key.slot = *slot;
      if (grouped) {
        bool in_group = false;
        for (std::size_t g : group_slots) {
          if (g == key.slot) in_group = true;
        }
        if (!in_group) {
          throw SemanticError("ORDER BY column must appear in GROUP BY for grouped queries");
        }
      }
    } else {
      const auto& agg = std::get<Aggregate>(item.expr);
      if (!grouped) throw SemanticError("ORDER BY aggregate requires an aggregate query");
      key.is_aggregate = true;
      key.agg = make_agg(agg);
    }
    order_keys.push_back(key);
  }

  // form result rows: (output values, order key values)
  struct ResultRow {
    std::vector<Value> values;
    std::vector<Value> keys;
  };
  std::vector<ResultRow> results;

  auto emit = [&](const std::vector<std::size_t>& members, const std::vector<Value>* rep) {
    ResultRow row;
    for (const auto& out : outputs) {
      if (out.is_aggregate) {
        row.values.push_back(detail::aggregate_over(out.agg, work, members));
      } else {
        row.values.push_back((*rep)[out.slot]);
      }
    }
    for (const auto& key : order_keys) {
      if (key.is_aggregate) {
        row.keys.push_back(detail::aggregate_over(key.agg, work, members));
      } else {
        row.keys.push_back((*rep)[key.slot]);
      }
    }
    results.push_back(std::move(row));
  };

  if (grouped) {
    if (group_slots.empty()) {
      // whole-table aggregate: COUNT yields a row even for empty input,
      // other aggregates are undefined on the empty set and yield no rows
      std::vector<std::size_t> members(work.rows.size());
      for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
      bool only_count = true;
      for (const auto& out : outputs) {
        if (out.agg.func != AggFunc::Count) only_count = false;
      }
      if (!work.rows.empty() || only_count) {
        std::vector<Value> empty_rep;
        const std::vector<Value>* rep = work.rows.empty() ? &empty_rep : &work.rows[0];
        emit(members, rep);
      }
    } else {
      // groups in first-occurrence order
      std::vector<std::vector<Value>> group_keys;
      std::vector<std::vector<std::size_t>> group_members;
      for (std::size_t r = 0; r < work.rows.size(); ++r) {
        std::vector<Value> key;
        for (std::size_t g : group_slots) key.push_back(work.rows[r][g]);
        std::size_t g = 0;
        for (; g < group_keys.size(); ++g) {
          bool same = true;
          for (std::size_t k = 0; k < key.size(); ++k) {
            if (!value_equals(group_keys[g][k], key[k])) same = false;
          }
          if (same) break;
        }
        if (g == group_keys.size()) {
          group_keys.push_back(key);
          group_members.emplace_back();
        }
        group_members[g].push_back(r);
      }
      for (std::size_t g = 0; g < group_keys.size(); ++g) {
        emit(group_members[g], &work.rows[group_members[g][0]]);
      }
    }
  } else {
    for (const auto& row : work.rows) {
      std::vector<std::size_t> no_members;
      emit(no_members, &row);
    }
  }

  if (!order_keys.empty()) {
    std::stable_sort(results.begin(), results.end(), [&](const ResultRow& a, const ResultRow& b) {
      for (std::size_t k = 0; k < order_keys.size(); ++k) {
        int c = detail::compare_values(a.keys[k], b.keys[k]);
        if (order_keys[k].descending) c = -c;
        if (c != 0) return c < 0;
      }
      return false;
    });
  }

  if (ast.limit && static_cast<std::size_t>(*ast.limit) < results.size()) {
    results.resize(static_cast<std::size_t>(*ast.limit));
  }

  Relation out;
  for (const auto& col : outputs) out.columns.push_back(col.name);
  for (auto& row : results) out.rows.push_back(std::move(row.values));
  return out;
}

namespace detail {

// Total order on cells for canonical multiset comparison; numerics compare
// by value regardless of int/real representation.
inline bool cell_less(const Value& a, const Value& b) {
  const bool na = is_numeric(a), nb = is_numeric(b);
  if (na != nb) return na;  // numerics sort before non-numerics
  if (na) {
    double x = as_real(a), y = as_real(b);
    if (x != y) return x < y;
    return a.index() < b.index();
  }
  if (a.index() != b.index()) return a.index() < b.index();
  return a < b;
}

inline bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (cell_less(a[i], b[i])) return true;
    if (cell_less(b[i], a[i])) return false;
  }
  return a.size() < b.size();
}

}  // namespace detail

// Result equality: ordered row comparison when the gold query has ORDER BY,
// multiset comparison otherwise. Column order is always significant; values
// compare with int/real promotion.
inline bool execution_match(const SqlAst& gold, const SqlAst& pred, const Database& db) {
  Relation a = execute(gold, db);
  Relation b = execute(pred, db);
  if (a.columns.size() != b.columns.size()) return false;
  if (a.rows.size() != b.rows.size()) return false;
  auto rows_equal = [](const std::vector<Value>& x, const std::vector<Value>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!value_equals(x[i], y[i])) return false;
    }
    return true;
  };
  std::vector<std::vector<Value>> ra = a.rows;
  std::vector<std::vector<Value>> rb = b.rows;
  if (gold.order_by.empty()) {
    std::sort(ra.begin(), ra.end(), detail::row_less);
    std::sort(rb.begin(), rb.end(), detail::row_less);
  }
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (!rows_equal(ra[i], rb[i])) return false;
  }
  return true;
}

}  // namespace nl2sql
