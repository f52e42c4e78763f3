#include <catch2/catch_amalgamated.hpp>

#include "nl2sql/eval.hpp"
#include "nl2sql/parse.hpp"
#include "nl2sql/ted.hpp"
#include "support/generators.hpp"
#include "support/ted_oracle.hpp"

using namespace nl2sql;

namespace {

// Tiny ASTs whose tree encodings stay at or below ~6 nodes, from small label
// pools so relabels, inserts and deletes all occur.
SqlAst random_small_ast(std::mt19937& rng) {
  static const char* tables[] = {"t", "u"};
  static const char* cols[] = {"a", "b"};
  SqlAst ast;
  ast.from_table = tables[bounded_uint(rng, 2)];
  switch (bounded_uint(rng, 4)) {
    case 0:
      ast.select_items.push_back(Star{});
      break;
    case 1:
      ast.select_items.push_back(ColumnRef{std::nullopt, cols[bounded_uint(rng, 2)]});
      break;
    case 2: {
      Aggregate agg;
      agg.func = bounded_uint(rng, 2) == 0 ? AggFunc::Count : AggFunc::Sum;
      if (agg.func == AggFunc::Count && bounded_uint(rng, 2) == 0) {
        agg.arg = Star{};
      } else {
        agg.arg = ColumnRef{std::nullopt, cols[bounded_uint(rng, 2)]};
      }
      ast.select_items.push_back(agg);
      break;
    }
    default:
      ast.select_items.push_back(ColumnRef{std::nullopt, cols[bounded_uint(rng, 2)]});
      ast.select_items.push_back(Star{});
      break;
  }
  if (bounded_uint(rng, 3) == 0) {
    ast.limit = static_cast<std::int64_t>(bounded_uint(rng, 3));
  }
  return ast;
}

}  // namespace

TEST_CASE("ted identity and basic weighting", "[ted]") {
  CostConfig costs;
  SqlAst q = parse("SELECT COUNT(*) FROM cars_data WHERE cylinders > 4");
  CHECK(ted(q, q, costs) == 0.0);

  SqlAst col_a = parse("SELECT a FROM t");
  SqlAst col_b = parse("SELECT b FROM t");
  SqlAst tbl_u = parse("SELECT a FROM u");
  double column_error = ted(col_a, col_b, costs);
  double table_error = ted(col_a, tbl_u, costs);
  CHECK(column_error == 1.0);
  CHECK(table_error == 3.0);
  CHECK(table_error > column_error);

  // the same pairs through the independent mapping oracle
  CHECK(testsupport::oracle_ted(encode_tree(col_a), encode_tree(col_b), costs) == 1.0);
  CHECK(testsupport::oracle_ted(encode_tree(col_a), encode_tree(tbl_u), costs) == 3.0);
}

TEST_CASE("ted equals the brute-force oracle on small trees", "[ted]") {
  std::mt19937 rng(88);
  CostConfig costs;
  for (int i = 0; i < 150; ++i) {
    SqlAst a = random_small_ast(rng);
    SqlAst b = random_small_ast(rng);
    TreeNode ta = encode_tree(a);
    TreeNode tb = encode_tree(b);
    REQUIRE(tree_size(ta) <= 8);
    double fast = ted_trees(ta, tb, costs);
    double slow = testsupport::oracle_ted(ta, tb, costs);
    CAPTURE(serialize(a), serialize(b));
    REQUIRE(fast == Catch::Approx(slow).margin(1e-9));
  }
}

TEST_CASE("ted metric properties", "[ted]") {
  std::mt19937 rng(77);
  CostConfig costs;
  for (int i = 0; i < 60; ++i) {
    SqlAst a = random_small_ast(rng);
    SqlAst b = random_small_ast(rng);
    SqlAst c = random_small_ast(rng);
    double ab = ted(a, b, costs);
    double ba = ted(b, a, costs);
    double ac = ted(a, c, costs);
    double cb = ted(c, b, costs);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab == Catch::Approx(ba));            // symmetric costs
    REQUIRE(ab <= ac + cb + 1e-9);               // triangle inequality
    REQUIRE(ted(a, a, costs) == 0.0);
  }
}

TEST_CASE("ted zero coincides with exact match under default costs", "[ted]") {
  std::mt19937 rng(55);
  CostConfig costs;
  for (int i = 0; i < 100; ++i) {
    SqlAst a = random_small_ast(rng);
    SqlAst b = random_small_ast(rng);
    bool exact = exact_match(a, b);
    double d = ted(a, b, costs);
    if (exact) REQUIRE(d == 0.0);
    if (d == 0.0) REQUIRE(exact);
  }
}

TEST_CASE("custom cost configuration is honored", "[ted]") {
  CostConfig costs;
  costs.column = ClassCosts{5.0, 5.0, 4.0};
  CHECK(ted(parse("SELECT a FROM t"), parse("SELECT b FROM t"), costs) == 4.0);
  // a cheap delete+insert beats an expensive relabel
  CostConfig expensive_relabel;
  expensive_relabel.column = ClassCosts{1.0, 1.0, 5.0};
  CHECK(ted(parse("SELECT a FROM t"), parse("SELECT b FROM t"), expensive_relabel) == 2.0);
  costs.validate();
  CostConfig bad;
  bad.table.insert = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("exact match canonicalizes text", "[ted]") {
  CHECK(exact_match(parse("select * from User"), parse("SELECT *   FROM User")));
  CHECK_FALSE(exact_match(parse("SELECT a FROM User"), parse("SELECT b FROM User")));
  // identifiers are verbatim: case differences are not exact matches
  CHECK_FALSE(exact_match(parse("SELECT * FROM user"), parse("SELECT * FROM User")));
}

TEST_CASE("aggregate report micro and macro averages", "[ted]") {
  CostConfig costs;
  SqlAst a_gold = parse("SELECT a FROM t");
  std::vector<EvalRow> rows = {
      {a_gold, parse("SELECT a FROM t"), 0.10},
      {parse("SELECT b FROM t"), parse("SELECT b FROM t"), 0.20},
      {a_gold, parse("SELECT a FROM u"), 0.30},                       // table error: TED 3
      {parse("SELECT a, b FROM t"), parse("SELECT c, d FROM t"), 0.40},  // two column errors
  };
  EvalReport report = aggregate_report(rows, costs);
  REQUIRE(report.templates.size() == 2);
  const auto& one_col = report.templates[0];   // "SELECT [COL] FROM [TABLE]"
  const auto& two_col = report.templates[1];   // "SELECT [COL], [COL] FROM [TABLE]"
  CHECK(one_col.count == 3);
  CHECK(one_col.mean_ted == Catch::Approx(1.0));
  CHECK(one_col.exact_match_rate == Catch::Approx(2.0 / 3.0));
  CHECK(two_col.count == 1);
  CHECK(two_col.mean_ted == Catch::Approx(2.0));
  CHECK(report.micro.mean_ted == Catch::Approx(1.25));
  CHECK(report.macro.mean_ted == Catch::Approx(1.5));
}

TEST_CASE("one row per template makes macro equal micro", "[ted]") {
  CostConfig costs;
  std::vector<EvalRow> rows = {
      {parse("SELECT a FROM t"), parse("SELECT b FROM t"), 0.1},
      {parse("SELECT a, b FROM t"), parse("SELECT a, b FROM t"), 0.2},
      {parse("SELECT COUNT(*) FROM t"), parse("SELECT COUNT(*) FROM u"), 0.3},
  };
  EvalReport report = aggregate_report(rows, costs);
  CHECK(report.micro.mean_ted == Catch::Approx(report.macro.mean_ted));
  CHECK(report.micro.exact_match_rate == Catch::Approx(report.macro.exact_match_rate));
}

TEST_CASE("latency percentiles are nearest-rank", "[ted]") {
  CostConfig costs;
  std::vector<EvalRow> rows;
  SqlAst q = parse("SELECT a FROM t");
  for (int i = 1; i <= 100; ++i) {
    rows.push_back({q, q, static_cast<double>(i)});
  }
  EvalReport report = aggregate_report(rows, costs);
  CHECK(report.latency_p50 == 50.0);
  CHECK(report.latency_p90 == 90.0);
  CHECK(report.latency_p99 == 99.0);

  SECTION("single sample") {
    std::vector<EvalRow> one = {{q, q, 1.77}};
    EvalReport r = aggregate_report(one, costs);
    CHECK(r.latency_p50 == 1.77);
    CHECK(r.latency_p99 == 1.77);
  }
  SECTION("ordering holds on random samples") {
    std::mt19937 rng(11);
    std::vector<EvalRow> random_rows;
    for (int i = 0; i < 37; ++i) {
      random_rows.push_back({q, q, static_cast<double>(bounded_uint(rng, 1000)) / 7.0});
    }
    EvalReport r = aggregate_report(random_rows, costs);
    CHECK(r.latency_p50 <= r.latency_p90);
    CHECK(r.latency_p90 <= r.latency_p99);
  }
}

TEST_CASE("aggregate report rejects empty input", "[ted]") {
  REQUIRE_THROWS_AS(aggregate_report({}, CostConfig{}), EmptyInputError);
}

TEST_CASE("aggregate report computes execution match rates with a database", "[ted]") {
  Database db;
  db.relations["t"] = Relation{{"a", "b"},
                               {{std::int64_t{1}, std::int64_t{10}},
                                {std::int64_t{2}, std::int64_t{20}}}};
  db.column_types["t"] = {ColumnType::Int, ColumnType::Int};
  std::vector<EvalRow> rows = {
      // different text, same result set: execution match without exact match
      {parse("SELECT a FROM t WHERE a > 0 AND b > 0"), parse("SELECT a FROM t WHERE b > 0 AND a > 0"), 0.1},
      {parse("SELECT a FROM t"), parse("SELECT b FROM t"), 0.1},
  };
  EvalReport report = aggregate_report(rows, CostConfig{}, &db);
  REQUIRE(report.micro.execution_match_rate.has_value());
  CHECK(*report.micro.execution_match_rate == Catch::Approx(0.5));
  CHECK(report.micro.exact_match_rate == Catch::Approx(0.0));
}
