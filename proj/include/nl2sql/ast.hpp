#pragma once

// Typed AST for the supported SQL subset: a single SELECT block with inner
// joins (single-equality ON), AND/OR over binary comparisons, the five
// aggregate functions, GROUP BY, ORDER BY and LIMIT.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nl2sql {

enum class AggFunc { Count, Sum, Avg, Min, Max };
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, Like };
enum class SortDir { Asc, Desc };

inline const char* agg_func_name(AggFunc f) {
  switch (f) {
    case AggFunc::Count: return "COUNT";
    case AggFunc::Sum: return "SUM";
    case AggFunc::Avg: return "AVG";
    case AggFunc::Min: return "MIN";
    case AggFunc::Max: return "MAX";
  }
  return "?";
}

inline const char* compare_op_name(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Like: return "LIKE";
  }
  return "?";
}

struct Star {
  friend bool operator==(const Star&, const Star&) { return true; }
};

// Optionally table-qualified column reference. Identifiers are stored
// verbatim; all name resolution is case-insensitive.
struct ColumnRef {
  std::optional<std::string> table;
  std::string column;

  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct Literal {
  std::variant<std::int64_t, double, std::string, bool> value;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Aggregate {
  AggFunc func = AggFunc::Count;
  std::variant<Star, ColumnRef> arg;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

using SelectItem = std::variant<Star, ColumnRef, Aggregate>;

struct Comparison {
  ColumnRef lhs;
  CompareOp op = CompareOp::Eq;
  std::variant<Literal, ColumnRef> rhs;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

// AND/OR tree over comparisons. Interior nodes have exactly two children;
// leaves carry a comparison. Parsing is left-associative with AND binding
// tighter than OR.
struct BoolExpr {
  enum class Kind { Comparison, And, Or };

  Kind kind = Kind::Comparison;
  std::optional<Comparison> cmp;   // set iff kind == Comparison
  std::vector<BoolExpr> children;  // size 2 iff kind != Comparison

  static BoolExpr leaf(Comparison c) {
    BoolExpr e;
    e.kind = Kind::Comparison;
    e.cmp = std::move(c);
    return e;
  }
  static BoolExpr combine(Kind k, BoolExpr lhs, BoolExpr rhs) {
    BoolExpr e;
    e.kind = k;
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
  }

  friend bool operator==(const BoolExpr&, const BoolExpr&) = default;
};

struct Join {
  std::string table;
  ColumnRef on_left;
  ColumnRef on_right;

  friend bool operator==(const Join&, const Join&) = default;
};

struct OrderItem {
  std::variant<ColumnRef, Aggregate> expr;
  SortDir dir = SortDir::Asc;

  friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct SqlAst {
  std::vector<SelectItem> select_items;
  std::string from_table;
  std::vector<Join> joins;
  std::optional<BoolExpr> where;
  std::vector<ColumnRef> group_by;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;

  friend bool operator==(const SqlAst&, const SqlAst&) = default;
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

namespace detail {

inline void collect_column_refs(const BoolExpr& e, std::vector<const ColumnRef*>& out) {
  if (e.kind == BoolExpr::Kind::Comparison) {
    out.push_back(&e.cmp->lhs);
    if (const auto* cr = std::get_if<ColumnRef>(&e.cmp->rhs)) out.push_back(cr);
    return;
  }
  for (const auto& child : e.children) collect_column_refs(child, out);
}

}  // namespace detail

// Every column reference in the AST, in clause order (select, joins' ON,
// where, group by, order by).
inline std::vector<const ColumnRef*> all_column_refs(const SqlAst& ast) {
  std::vector<const ColumnRef*> refs;
  for (const auto& item : ast.select_items) {
    if (const auto* cr = std::get_if<ColumnRef>(&item)) refs.push_back(cr);
    if (const auto* agg = std::get_if<Aggregate>(&item)) {
      if (const auto* cr = std::get_if<ColumnRef>(&agg->arg)) refs.push_back(cr);
    }
  }
  for (const auto& j : ast.joins) {
    refs.push_back(&j.on_left);
    refs.push_back(&j.on_right);
  }
  if (ast.where) detail::collect_column_refs(*ast.where, refs);
  for (const auto& cr : ast.group_by) refs.push_back(&cr);
  for (const auto& oi : ast.order_by) {
    if (const auto* cr = std::get_if<ColumnRef>(&oi.expr)) refs.push_back(cr);
    if (const auto* agg = std::get_if<Aggregate>(&oi.expr)) {
      if (const auto* cr = std::get_if<ColumnRef>(&agg->arg)) refs.push_back(cr);
    }
  }
  return refs;
}

// Tables named in FROM/JOIN, in query order.
inline std::vector<std::string> scope_tables(const SqlAst& ast) {
  std::vector<std::string> tables;
  tables.push_back(ast.from_table);
  for (const auto& j : ast.joins) tables.push_back(j.table);
  return tables;
}

// Checks the structural invariants of the type. Returns a description of the
// first violated invariant, or nullopt when the AST is well formed.
inline std::optional<std::string> check_invariants(const SqlAst& ast) {
  if (ast.select_items.empty()) return "select_items must be nonempty";
  if (ast.from_table.empty()) return "from_table must be nonempty";
  if (ast.limit && *ast.limit < 0) return "limit must be nonnegative";

  std::vector<std::string> scope;
  for (const auto& t : scope_tables(ast)) {
    for (const auto& seen : scope) {
      if (iequals(seen, t)) return "duplicate table '" + t + "' in FROM/JOIN";
    }
    scope.push_back(t);
  }
  for (const ColumnRef* cr : all_column_refs(ast)) {
    if (cr->column.empty()) return "column name must be nonempty";
    if (!cr->table) continue;
    bool in_scope = false;
    for (const auto& t : scope) {
      if (iequals(t, *cr->table)) in_scope = true;
    }
    if (!in_scope) return "qualifier '" + *cr->table + "' does not appear in FROM/JOIN";
  }
  for (const auto& item : ast.select_items) {
    if (const auto* agg = std::get_if<Aggregate>(&item)) {
      if (agg->func != AggFunc::Count && std::holds_alternative<Star>(agg->arg)) {
        return "only COUNT may take * as an argument";
      }
    }
  }
  for (const auto& oi : ast.order_by) {
    if (const auto* agg = std::get_if<Aggregate>(&oi.expr)) {
      if (agg->func != AggFunc::Count && std::holds_alternative<Star>(agg->arg)) {
        return "only COUNT may take * as an argument";
      }
    }
  }
  return std::nullopt;
}

}  // namespace nl2sql
