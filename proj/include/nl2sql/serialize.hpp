#pragma once

// Canonical SQL text: keywords uppercase, single spaces, identifiers
// verbatim, fixed clause order, ASC omitted. parse(serialize(a)) == a for any
// parser-producible AST.

#include <charconv>
#include <string>
#include <variant>

#include "nl2sql/ast.hpp"

namespace nl2sql {

inline std::string literal_to_string(const Literal& lit) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      (void)ec;
      std::string s(buf, ptr);
      // keep decimal form lexable as a decimal literal
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
          s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
      }
      return s;
    }
    std::string operator()(const std::string& v) const {
      std::string out = "'";
      for (char c : v) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
      }
      out.push_back('\'');
      return out;
    }
    std::string operator()(bool v) const { return v ? "TRUE" : "FALSE"; }
  };
  return std::visit(Visitor{}, lit.value);
}

namespace detail {

struct SqlWriter {
  // Template mode replaces identifiers with [TABLE]/[COL] and literals
  // (including the LIMIT value) with [VAL].
  bool template_mode = false;
  std::string out;

  void word(std::string_view s) {
    if (!out.empty()) out.push_back(' ');
    out.append(s);
  }
  void append(std::string_view s) { out.append(s); }

  void table(const std::string& name) { word(template_mode ? "[TABLE]" : name); }

  std::string column_text(const ColumnRef& ref) const {
    if (template_mode) return "[COL]";
    if (ref.table) return *ref.table + "." + ref.column;
    return ref.column;
  }
  void column(const ColumnRef& ref) { word(column_text(ref)); }

  void aggregate(const Aggregate& agg) {
    word(agg_func_name(agg.func));
    append("(");
    if (std::holds_alternative<Star>(agg.arg)) {
      append("*");
    } else {
      append(column_text(std::get<ColumnRef>(agg.arg)));
    }
    append(")");
  }

  void literal(const Literal& lit) { word(template_mode ? "[VAL]" : literal_to_string(lit)); }

  void select_item(const SelectItem& item) {
    if (std::holds_alternative<Star>(item)) {
      word("*");
    } else if (const auto* ref = std::get_if<ColumnRef>(&item)) {
      column(*ref);
    } else {
      aggregate(std::get<Aggregate>(item));
    }
  }

  void comparison(const Comparison& cmp) {
    column(cmp.lhs);
    word(compare_op_name(cmp.op));
    if (const auto* lit = std::get_if<Literal>(&cmp.rhs)) {
      literal(*lit);
    } else {
      column(std::get<ColumnRef>(cmp.rhs));
    }
  }

  void bool_expr(const BoolExpr& e) {
    if (e.kind == BoolExpr::Kind::Comparison) {
      comparison(*e.cmp);
      return;
    }
    bool_expr(e.children[0]);
    word(e.kind == BoolExpr::Kind::And ? "AND" : "OR");
    bool_expr(e.children[1]);
  }

  void query(const SqlAst& ast) {
    word("SELECT");
    for (std::size_t i = 0; i < ast.select_items.size(); ++i) {
      if (i > 0) append(",");
      select_item(ast.select_items[i]);
    }
    word("FROM");
    table(ast.from_table);
    for (const auto& j : ast.joins) {
      word("JOIN");
      table(j.table);
      word("ON");
      column(j.on_left);
      word("=");
      column(j.on_right);
    }
    if (ast.where) {
      word("WHERE");
      bool_expr(*ast.where);
    }
    if (!ast.group_by.empty()) {
      word("GROUP");
      word("BY");
      for (std::size_t i = 0; i < ast.group_by.size(); ++i) {
        if (i > 0) append(",");
        column(ast.group_by[i]);
      }
    }
    if (!ast.order_by.empty()) {
      word("ORDER");
      word("BY");
      for (std::size_t i = 0; i < ast.order_by.size(); ++i) {
        if (i > 0) append(",");
        const OrderItem& item = ast.order_by[i];
        if (const auto* ref = std::get_if<ColumnRef>(&item.expr)) {
          column(*ref);
        } else {
          aggregate(std::get<Aggregate>(item.expr));
        }
        if (item.dir == SortDir::Desc) word("DESC");
      }
    }
    if (ast.limit) {
      word("LIMIT");
      word(template_mode ? "[VAL]" : std::to_string(*ast.limit));
    }
  }
};

}  // namespace detail

inline std::string serialize(const SqlAst& ast) {
  detail::SqlWriter writer;
  writer.query(ast);
  return writer.out;
}

}  // namespace nl2sql
