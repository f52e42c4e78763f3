#pragma once

// Quality estimation over (NL, SQL) pairs: the eight engineered features,
// SQL hardness classification, Levenshtein distance, and a small CART-style
// decision tree (Gini impurity, midpoint thresholds) used as the trigger /
// filter classifier.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/parse.hpp"
#include "nl2sql/serialize.hpp"

namespace nl2sql {

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

enum class Hardness { Easy = 1, Medium = 2, Hard = 3, Extra = 4 };

inline const char* hardness_name(Hardness h) {
  switch (h) {
    case Hardness::Easy: return "Easy";
    case Hardness::Medium: return "Medium";
    case Hardness::Hard: return "Hard";
    case Hardness::Extra: return "Extra";
  }
  return "?";
}

namespace detail {

inline std::size_t comparison_count(const BoolExpr& e) {
  if (e.kind == BoolExpr::Kind::Comparison) return 1;
  return comparison_count(e.children[0]) + comparison_count(e.children[1]);
}

inline std::size_t aggregate_count(const SqlAst& ast) {
  std::size_t n = 0;
  for (const auto& item : ast.select_items) {
    if (std::holds_alternative<Aggregate>(item)) ++n;
  }
  for (const auto& item : ast.order_by) {
    if (std::holds_alternative<Aggregate>(item.expr)) ++n;
  }
  return n;
}

}  // namespace detail

// Component-count hardness: joins, a multi-comparison WHERE, GROUP BY,
// ORDER BY, LIMIT and extra aggregates each contribute one component. A
// single-table select with at most one aggregate and one comparison stays
// Easy regardless.
inline Hardness hardness(const SqlAst& ast) {
  const std::size_t joins = ast.joins.size();
  const std::size_t comparisons = ast.where ? detail::comparison_count(*ast.where) : 0;
  const std::size_t aggregates = detail::aggregate_count(ast);

  std::size_t c = joins;
  if (comparisons >= 2) c += 1;
  if (!ast.group_by.empty()) c += 1;
  if (!ast.order_by.empty()) c += 1;
  if (ast.limit) c += 1;
  if (aggregates > 1) c += aggregates - 1;

  if (c == 0 || (joins == 0 && aggregates <= 1 && comparisons <= 1)) return Hardness::Easy;
  if (c <= 2) return Hardness::Medium;
  if (c <= 4) return Hardness::Hard;
  return Hardness::Extra;
}

struct Lexicons {
  std::vector<std::string> directions;
  std::vector<std::string> limit_words;

  // The paper's dictionaries are unpublished; these are the shipped defaults.
  static Lexicons defaults() {
    return Lexicons{
        {"ascending", "descending", "increasing", "decreasing", "alphabetical", "reverse"},
        {"top", "first", "last", "only", "maximum", "at most"},
    };
  }
};

struct FeatureVector {
  double work_time_s = 0.0;
  bool has_more_than_two_words = false;
  bool terminals_in_nl = false;
  Hardness sql_complexity = Hardness::Easy;  // encoded 1-4
  double time_per_complexity = 0.0;
  std::size_t levenshtein_nl_sql = 0;
  bool order_by_direction_match = false;
  bool limit_words_present = false;

  static constexpr std::size_t kFeatureCount = 8;

  double feature(std::size_t index) const {
    switch (index) {
      case 0: return work_time_s;
      case 1: return has_more_than_two_words ? 1.0 : 0.0;
      case 2: return terminals_in_nl ? 1.0 : 0.0;
      case 3: return static_cast<double>(static_cast<int>(sql_complexity));
      case 4: return time_per_complexity;
      case 5: return static_cast<double>(levenshtein_nl_sql);
      case 6: return order_by_direction_match ? 1.0 : 0.0;
      case 7: return limit_words_present ? 1.0 : 0.0;
    }
    throw Error("InvalidArgument", "feature index out of range");
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline const char* feature_name(std::size_t index) {
  static const char* names[] = {
      "work_time_s", "has_more_than_two_words", "terminals_in_nl", "sql_complexity",
      "time_per_complexity", "levenshtein_nl_sql", "order_by_direction_match",
      "limit_words_present",
  };
  return index < 8 ? names[index] : "?";
}

namespace detail {

inline bool contains_ci(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return true;
  std::string h = to_lower(haystack), n = to_lower(needle);
  return h.find(n) != std::string::npos;
}

// SQL terminals to look for in the NL: literals always; identifiers only
// when include_identifiers is set.
inline std::vector<std::string> sql_terminals(const SqlAst& ast, bool include_identifiers) {
  std::vector<std::string> terms;
  auto add_literal = [&terms](const Literal& lit) {
    if (const auto* s = std::get_if<std::string>(&lit.value)) {
      terms.push_back(*s);
    } else if (const auto* b = std::get_if<bool>(&lit.value)) {
      terms.push_back(*b ? "true" : "false");
    } else {
      terms.push_back(literal_to_string(lit));
    }
  };
  if (ast.where) {
    std::vector<const BoolExpr*> stack{&*ast.where};
    while (!stack.empty()) {
      const BoolExpr* e = stack.back();
      stack.pop_back();
      if (e->kind == BoolExpr::Kind::Comparison) {
        if (const auto* lit = std::get_if<Literal>(&e->cmp->rhs)) add_literal(*lit);
      } else {
        for (const auto& child : e->children) stack.push_back(&child);
      }
    }
  }
  if (ast.limit) terms.push_back(std::to_string(*ast.limit));
  if (include_identifiers) {
    for (const auto& t : scope_tables(ast)) terms.push_back(t);
    for (const ColumnRef* ref : all_column_refs(ast)) terms.push_back(ref->column);
  }
  return terms;
}

inline std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace detail

struct FeatureOptions {
  // "all the terminals" is ambiguous about identifiers; by default only
  // literals are checked against the NL.
  bool terminals_include_identifiers = false;
};

inline FeatureVector extract_features(const std::string& nl, const std::string& sql_text,
                                      double work_time_s, const Lexicons& lexicons = Lexicons::defaults(),
                                      const FeatureOptions& options = FeatureOptions{}) {
  SqlAst ast = parse(sql_text);

  FeatureVector fv;
  fv.work_time_s = work_time_s;
  fv.has_more_than_two_words = detail::whitespace_tokens(nl).size() > 2;

  fv.terminals_in_nl = true;
  for (const auto& term : detail::sql_terminals(ast, options.terminals_include_identifiers)) {
    if (!detail::contains_ci(nl, term)) {
      fv.terminals_in_nl = false;
      break;
    }
  }

  fv.sql_complexity = hardness(ast);
  fv.time_per_complexity = work_time_s / static_cast<double>(static_cast<int>(fv.sql_complexity));
  fv.levenshtein_nl_sql = levenshtein(nl, sql_text);

  // vacuous when the SQL has no ORDER BY / LIMIT: the feature never penalizes
  if (ast.order_by.empty()) {
    fv.order_by_direction_match = true;
  } else {
    fv.order_by_direction_match = false;
    for (const auto& word : lexicons.directions) {
      if (detail::contains_ci(nl, word)) {
        fv.order_by_direction_match = true;
        break;
      }
    }
  }
  if (!ast.limit) {
    fv.limit_words_present = true;
  } else {
    fv.limit_words_present = false;
    for (const auto& word : lexicons.limit_words) {
      if (detail::contains_ci(nl, word)) {
        fv.limit_words_present = true;
        break;
      }
    }
  }
  return fv;
}

// ---- decision tree ----------------------------------------------------------

struct DecisionTree {
  struct Node {
    bool is_leaf = true;
    // leaf
    bool klass = false;
    double score = 0.0;  // positive fraction at the leaf, in [0,1]
    // internal
    std::size_t feature = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;

    friend bool operator==(const Node&, const Node&) = default;
  };

  std::vector<Node> nodes;  // nodes[0] is the root
  std::size_t max_depth = 1;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

// Threshold comparisons: <= goes left; bools are 0/1.
inline std::pair<bool, double> tree_eval(const DecisionTree& tree, const FeatureVector& fv) {
  if (tree.nodes.empty()) throw Error("InvalidTree", "decision tree has no nodes");
  int at = 0;
  for (;;) {
    const DecisionTree::Node& node = tree.nodes[static_cast<std::size_t>(at)];
    if (node.is_leaf) return {node.klass, node.score};
    at = fv.feature(node.feature) <= node.threshold ? node.left : node.right;
    if (at < 0 || static_cast<std::size_t>(at) >= tree.nodes.size()) {
      throw Error("InvalidTree", "decision tree child index out of range");
    }
  }
}

struct LabeledFeatures {
  FeatureVector features;
  bool label = false;
};

namespace detail {

inline double gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
  bool found = false;
};

inline SplitChoice best_split(const std::vector<LabeledFeatures>& data,
                              const std::vector<std::size_t>& rows, std::size_t min_leaf) {
  SplitChoice best;
  for (std::size_t f = 0; f < FeatureVector::kFeatureCount; ++f) {
    std::vector<std::pair<double, bool>> vals;
    vals.reserve(rows.size());
    for (std::size_t r : rows) vals.emplace_back(data[r].features.feature(f), data[r].label);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::size_t total_pos = 0;
    for (const auto& [v, lab] : vals) total_pos += lab ? 1 : 0;

    std::size_t left_n = 0, left_pos = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      left_n += 1;
      left_pos += vals[i].second ? 1 : 0;
      if (vals[i].first == vals[i + 1].first) continue;  // midpoint needs distinct values
      std::size_t right_n = vals.size() - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      double threshold = (vals[i].first + vals[i + 1].first) / 2.0;
      double impurity =
          (static_cast<double>(left_n) * gini(left_pos, left_n) +
           static_cast<double>(right_n) * gini(total_pos - left_pos, right_n)) /
          static_cast<double>(vals.size());
      // tie-break: lowest feature index, then lowest threshold (scan order)
      if (impurity < best.impurity) {
        best.feature = f;
        best.threshold = threshold;
        best.impurity = impurity;
        best.found = true;
      }
    }
  }
  return best;
}

inline int build_node(DecisionTree& tree, const std::vector<LabeledFeatures>& data,
                      const std::vector<std::size_t>& rows, std::size_t depth,
                      std::size_t max_depth, std::size_t min_leaf) {
  std::size_t pos = 0;
  for (std::size_t r : rows) pos += data[r].label ? 1 : 0;

  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  auto make_leaf = [&tree, index, pos, &rows]() {
    DecisionTree::Node& n = tree.nodes[static_cast<std::size_t>(index)];
    n.is_leaf = true;
    n.score = static_cast<double>(pos) / static_cast<double>(rows.size());
    n.klass = 2 * pos >= rows.size();
    return index;
  };

  if (depth >= max_depth || pos == 0 || pos == rows.size()) return make_leaf();
  SplitChoice split = best_split(data, rows, min_leaf);
  if (!split.found) return make_leaf();

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows) {
    if (data[r].features.feature(split.feature) <= split.threshold) {
      left_rows.push_back(r);
    } else {
      right_rows.push_back(r);
    }
  }
  int left = build_node(tree, data, left_rows, depth + 1, max_depth, min_leaf);
  int right = build_node(tree, data, right_rows, depth + 1, max_depth, min_leaf);
  DecisionTree::Node& n = tree.nodes[static_cast<std::size_t>(index)];
  n.is_leaf = false;
  n.feature = split.feature;
  n.threshold = split.threshold;
  n.left = left;
  n.right = right;
  return index;
}

}  // namespace detail

// Greedy CART training: Gini impurity over midpoint thresholds, stopping at
// max_depth, min_leaf or purity. Deterministic for fixed input.
inline DecisionTree tree_train(const std::vector<LabeledFeatures>& data, std::size_t max_depth,
                               std::size_t min_leaf) {
  if (data.empty()) throw EmptyInputError("tree_train requires data");
  if (max_depth < 1) throw Error("InvalidArgument", "max_depth must be >= 1");
  if (min_leaf < 1) throw Error("InvalidArgument", "min_leaf must be >= 1");
  DecisionTree tree;
  tree.max_depth = max_depth;
  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::build_node(tree, data, rows, 0, max_depth, min_leaf);
  return tree;
}

struct ScoredPair {
  std::string nl;
  std::string sql;
  double work_time_s = 0.0;
  double score = 0.0;
};

struct FilterResult {
  std::vector<ScoredPair> accepted;  // score >= threshold
  std::vector<ScoredPair> flagged;   // below threshold, kept for manual review
};

inline FilterResult filter_pairs(const std::vector<ScoredPair>& pairs, const DecisionTree& tree,
                                 double threshold, const Lexicons& lexicons = Lexicons::defaults(),
                                 const FeatureOptions& options = FeatureOptions{}) {
  FilterResult result;
  for (const auto& pair : pairs) {
    FeatureVector fv = extract_features(pair.nl, pair.sql, pair.work_time_s, lexicons, options);
    auto [klass, score] = tree_eval(tree, fv);
    (void)klass;
    ScoredPair scored = pair;
    scored.score = score;
    if (score >= threshold) {
      result.accepted.push_back(std::move(scored));
    } else {
      result.flagged.push_back(std::move(scored));
    }
  }
  return result;
}

}  // namespace nl2sql
