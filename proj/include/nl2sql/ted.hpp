#pragma once

// Weighted ordered tree edit distance between SQL ASTs via the Zhang-Shasha
// keyroot dynamic program. Each AST node becomes one labeled tree node;
// clause keywords are structural nodes so an error in a selected table is a
// single relabel at a table node, weighted more heavily than a column error.

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/serialize.hpp"

namespace nl2sql {

enum class NodeClass { Table, Column, Literal, Operator, AggregateFunc, Clause };

inline const char* node_class_name(NodeClass c) {
  switch (c) {
    case NodeClass::Table: return "table";
    case NodeClass::Column: return "column";
    case NodeClass::Literal: return "literal";
    case NodeClass::Operator: return "operator";
    case NodeClass::AggregateFunc: return "aggregate_func";
    case NodeClass::Clause: return "clause";
  }
  return "?";
}

struct ClassCosts {
  double insert = 1.0;
  double del = 1.0;
  double relabel = 1.0;

  friend bool operator==(const ClassCosts&, const ClassCosts&) = default;
};

// Defaults follow the table > clause > everything-else weighting: table
// (3,3,3), clause (2,2,2), others (1,1,1).
struct CostConfig {
  ClassCosts table{3.0, 3.0, 3.0};
  ClassCosts column{1.0, 1.0, 1.0};
  ClassCosts literal{1.0, 1.0, 1.0};
  ClassCosts op{1.0, 1.0, 1.0};
  ClassCosts aggregate_func{1.0, 1.0, 1.0};
  ClassCosts clause{2.0, 2.0, 2.0};

  const ClassCosts& for_class(NodeClass c) const {
    switch (c) {
      case NodeClass::Table: return table;
      case NodeClass::Column: return column;
      case NodeClass::Literal: return literal;
      case NodeClass::Operator: return op;
      case NodeClass::AggregateFunc: return aggregate_func;
      case NodeClass::Clause: return clause;
    }
    return clause;
  }

  void validate() const {
    for (NodeClass c : {NodeClass::Table, NodeClass::Column, NodeClass::Literal,
                        NodeClass::Operator, NodeClass::AggregateFunc, NodeClass::Clause}) {
      const ClassCosts& cc = for_class(c);
      if (cc.insert < 0 || cc.del < 0 || cc.relabel < 0) {
        throw Error("InvalidCostConfig", "costs must be nonnegative");
      }
    }
  }

  friend bool operator==(const CostConfig&, const CostConfig&) = default;
};

struct TreeNode {
  NodeClass node_class = NodeClass::Clause;
  std::string label;
  std::vector<TreeNode> children;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

inline std::size_t tree_size(const TreeNode& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += tree_size(child);
  return n;
}

namespace detail {

inline TreeNode column_node(const ColumnRef& ref) {
  std::string label = ref.table ? *ref.table + "." + ref.column : ref.column;
  return TreeNode{NodeClass::Column, std::move(label), {}};
}

inline TreeNode aggregate_node(const Aggregate& agg) {
  TreeNode node{NodeClass::AggregateFunc, agg_func_name(agg.func), {}};
  if (std::holds_alternative<Star>(agg.arg)) {
    node.children.push_back(TreeNode{NodeClass::Column, "*", {}});
  } else {
    node.children.push_back(column_node(std::get<ColumnRef>(agg.arg)));
  }
  return node;
}

inline TreeNode bool_expr_node(const BoolExpr& e) {
  if (e.kind == BoolExpr::Kind::Comparison) {
    const Comparison& cmp = *e.cmp;
    TreeNode node{NodeClass::Operator, compare_op_name(cmp.op), {}};
    node.children.push_back(column_node(cmp.lhs));
    if (const auto* lit = std::get_if<Literal>(&cmp.rhs)) {
      node.children.push_back(TreeNode{NodeClass::Literal, literal_to_string(*lit), {}});
    } else {
      node.children.push_back(column_node(std::get<ColumnRef>(cmp.rhs)));
    }
    return node;
  }
  TreeNode node{NodeClass::Operator, e.kind == BoolExpr::Kind::And ? "AND" : "OR", {}};
  node.children.push_back(bool_expr_node(e.children[0]));
  node.children.push_back(bool_expr_node(e.children[1]));
  return node;
}

}  // namespace detail

// Canonical labeled ordered-tree encoding of an AST.
inline TreeNode encode_tree(const SqlAst& ast) {
  TreeNode root{NodeClass::Clause, "QUERY", {}};

  TreeNode select{NodeClass::Clause, "SELECT", {}};
  for (const auto& item : ast.select_items) {
    if (std::holds_alternative<Star>(item)) {
      select.children.push_back(TreeNode{NodeClass::Column, "*", {}});
    } else if (const auto* ref = std::get_if<ColumnRef>(&item)) {
      select.children.push_back(detail::column_node(*ref));
    } else {
      select.children.push_back(detail::aggregate_node(std::get<Aggregate>(item)));
    }
  }
  root.children.push_back(std::move(select));

  TreeNode from{NodeClass::Clause, "FROM", {}};
  from.children.push_back(TreeNode{NodeClass::Table, ast.from_table, {}});
  root.children.push_back(std::move(from));

  for (const auto& join : ast.joins) {
    TreeNode jn{NodeClass::Clause, "JOIN", {}};
    jn.children.push_back(TreeNode{NodeClass::Table, join.table, {}});
    jn.children.push_back(detail::column_node(join.on_left));
    jn.children.push_back(detail::column_node(join.on_right));
    root.children.push_back(std::move(jn));
  }

  if (ast.where) {
    TreeNode where{NodeClass::Clause, "WHERE", {}};
    where.children.push_back(detail::bool_expr_node(*ast.where));
    root.children.push_back(std::move(where));
  }

  if (!ast.group_by.empty()) {
    TreeNode group{NodeClass::Clause, "GROUP BY", {}};
    for (const auto& ref : ast.group_by) group.children.push_back(detail::column_node(ref));
    root.children.push_back(std::move(group));
  }

  if (!ast.order_by.empty()) {
    TreeNode order{NodeClass::Clause, "ORDER BY", {}};
    for (const auto& item : ast.order_by) {
      TreeNode dir{NodeClass::Clause, item.dir == SortDir::Desc ? "DESC" : "ASC", {}};
      if (const auto* ref = std::get_if<ColumnRef>(&item.expr)) {
        dir.children.push_back(detail::column_node(*ref));
      } else {
        dir.children.push_back(detail::aggregate_node(std::get<Aggregate>(item.expr)));
      }
      order.children.push_back(std::move(dir));
    }
    root.children.push_back(std::move(order));
  }

  if (ast.limit) {
    TreeNode limit{NodeClass::Clause, "LIMIT", {}};
    limit.children.push_back(TreeNode{NodeClass::Literal, std::to_string(*ast.limit), {}});
    root.children.push_back(std::move(limit));
  }

  return root;
}

namespace detail {

inline double insert_cost(const CostConfig& costs, NodeClass c) { return costs.for_class(c).insert; }
inline double delete_cost(const CostConfig& costs, NodeClass c) { return costs.for_class(c).del; }

// Relabel is zero for identical (class, label) pairs; across classes the
// larger of the two classes' relabel costs applies, which keeps the cost
// symmetric and triangle-friendly.
inline double relabel_cost(const CostConfig& costs, NodeClass ca, const std::string& la,
                           NodeClass cb, const std::string& lb) {
  if (ca == cb && la == lb) return 0.0;
  return std::max(costs.for_class(ca).relabel, costs.for_class(cb).relabel);
}

// Post-order flattening with leftmost-leaf-descendant indices and keyroots.
struct FlatTree {
  std::vector<NodeClass> classes;        // post-order
  std::vector<const std::string*> labels;
  std::vector<int> lmld;                 // leftmost leaf descendant, post-order index
  std::vector<int> keyroots;

  explicit FlatTree(const TreeNode& root) {
    walk(root);
    std::vector<bool> seen(classes.size(), false);
    for (int i = static_cast<int>(classes.size()) - 1; i >= 0; --i) {
      if (!seen[lmld[i]]) {
        keyroots.push_back(i);
        seen[lmld[i]] = true;
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  int size() const { return static_cast<int>(classes.size()); }

 private:
  int walk(const TreeNode& node) {
    int first_leaf = -1;
    for (const auto& child : node.children) {
      int leaf = walk(child);
      if (first_leaf == -1) first_leaf = leaf;
    }
    int index = static_cast<int>(classes.size());
    if (first_leaf == -1) first_leaf = index;
    classes.push_back(node.node_class);
    labels.push_back(&node.label);
    lmld.push_back(first_leaf);
    return first_leaf;
  }
};

}  // namespace detail

// Minimum-cost ordered tree edit distance (insert/delete/relabel) between
// two labeled trees.
inline double ted_trees(const TreeNode& tree_a, const TreeNode& tree_b, const CostConfig& costs) {
  costs.validate();
  detail::FlatTree a(tree_a);
  detail::FlatTree b(tree_b);
  const int n = a.size();
  const int m = b.size();

  std::vector<std::vector<double>> treedist(n, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> fd(static_cast<std::size_t>(n) + 1,
                                      std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));

  for (int ki : a.keyroots) {
    for (int kj : b.keyroots) {
      const int ioff = a.lmld[ki] - 1;
      const int joff = b.lmld[kj] - 1;
      const int rows = ki - ioff;  // forest sizes
      const int cols = kj - joff;
      fd[0][0] = 0.0;
      for (int x = 1; x <= rows; ++x) {
        fd[x][0] = fd[x - 1][0] + detail::delete_cost(costs, a.classes[x + ioff]);
      }
      for (int y = 1; y <= cols; ++y) {
        fd[0][y] = fd[0][y - 1] + detail::insert_cost(costs, b.classes[y + joff]);
      }
      for (int x = 1; x <= rows; ++x) {
        for (int y = 1; y <= cols; ++y) {
          const int ai = x + ioff;
          const int bj = y + joff;
          const double del = fd[x - 1][y] + detail::delete_cost(costs, a.classes[ai]);
          const double ins = fd[x][y - 1] + detail::insert_cost(costs, b.classes[bj]);
          if (a.lmld[ai] == a.lmld[ki] && b.lmld[bj] == b.lmld[kj]) {
            const double rel = fd[x - 1][y - 1] + detail::relabel_cost(costs, a.classes[ai], *a.labels[ai],
                                                                       b.classes[bj], *b.labels[bj]);
            fd[x][y] = std::min({del, ins, rel});
            treedist[ai][bj] = fd[x][y];
          } else {
            const int p = a.lmld[ai] - 1 - ioff;
            const int q = b.lmld[bj] - 1 - joff;
            const double sub = fd[p][q] + treedist[ai][bj];
            fd[x][y] = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return treedist[n - 1][m - 1];
}

inline double ted(const SqlAst& gold, const SqlAst& pred, const CostConfig& costs = CostConfig{}) {
  return ted_trees(encode_tree(gold), encode_tree(pred), costs);
}

}  // namespace nl2sql
