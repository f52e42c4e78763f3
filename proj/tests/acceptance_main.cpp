// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "nl2sql/nl2sql.hpp"
#include "support/generators.hpp"
#include "support/ted_oracle.hpp"

using namespace nl2sql;
using testsupport::random_database;
using testsupport::random_query;
using testsupport::random_schema;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vocabulary vocab_for(const DataModelSchema& schema) {
  Vocabulary vocab;
  vocab.tokens = {
      "SELECT ", "*",    ", ",   " FROM ",  " JOIN ",  " ON ",    " WHERE ", " GROUP BY ",
      " ORDER BY ", " LIMIT ", " AND ", " OR ",    " ASC",    " DESC",   ".",       " = ",
      " <> ",    " < ",  " <= ", " > ",     " >= ",    " LIKE ",  "COUNT(",  "SUM(",
      "AVG(",    "MIN(", "MAX(", ")",       "0",       "1",       "7",       "42",
      "2.5",     "'v'",  "'a'",  " ",
  };
  for (const auto& table : schema.tables) {
    vocab.tokens.push_back(table.name);
    for (const auto& col : table.columns) vocab.tokens.push_back(col.name);
  }
  vocab.tokens.push_back("</s>");
  vocab.eos_index = static_cast<int>(vocab.tokens.size()) - 1;
  return vocab;
}

// 1. Decoder validity: 1,000 beam_decode runs over randomized small schemas
// with the uniform and n-gram scorers produce zero unparseable or
// schema-invalid outputs.
void criterion_decoder_validity() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(1001);
  int runs = 0, invalid = 0, produced = 0;
  for (int i = 0; i < 1000; ++i) {
    DataModelSchema schema = random_schema(rng, 5, 6);
    Vocabulary vocab = vocab_for(schema);
    ScorerFn scorer;
    if (i % 2 == 0) {
      scorer = uniform_scorer(vocab.tokens.size());
    } else {
      std::vector<std::string> corpus;
      for (int c = 0; c < 3; ++c) corpus.push_back(serialize(random_query(rng, schema)));
      scorer = CharTrigramScorer(vocab, corpus);
    }
    int beam = 1 + static_cast<int>(bounded_uint(rng, 4));
    try {
      auto hyps = beam_decode("q", compile_schema(schema), scorer, vocab, beam, 48);
      for (const auto& hyp : hyps) {
        ++produced;
        try {
          SqlAst ast = parse(hyp.text);
          if (!validate_against_schema(ast, schema).empty()) ++invalid;
        } catch (const Error&) {
          ++invalid;
        }
      }
      ++runs;
    } catch (const Error&) {
      ++invalid;  // a decode that cannot finish counts against validity
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail), "%d runs, %d candidates, %d invalid, %.1fs", runs,
                produced, invalid, seconds_since(start));
  report(1, "decoder validity", runs == 1000 && invalid == 0, detail);
}

// 2. Mask soundness/completeness: 10,000 fuzzed (viable prefix, token) pairs
// agree with the advance oracle in 100% of cases.
void criterion_mask_soundness() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(2002);
  std::vector<std::string> base_pool = {
      "SELECT ", " FROM ", " WHERE ", " JOIN ", " ON ", " GROUP BY ", " ORDER BY ", " LIMIT ",
      " AND ", " OR ", "*", ", ", ".", " = ", " <> ", " < ", " >= ", "COUNT(", "SUM(", ")",
      "'v'", "1", "42", " ASC", " DESC", " LIKE ", "zzz", "+", " ", "SELECT",
  };
  long checked = 0, mismatched = 0, dead_prefixes = 0;
  while (checked < 10000) {
    DataModelSchema schema = random_schema(rng, 5, 6);
    std::vector<std::string> pool = base_pool;
    for (const auto& table : schema.tables) {
      pool.push_back(table.name);
      pool.push_back(table.name.substr(0, 1 + table.name.size() / 2));  // identifier prefixes
      for (const auto& col : table.columns) pool.push_back(col.name);
    }
    std::string text = serialize(random_query(rng, schema));
    std::size_t cut = bounded_uint(rng, static_cast<std::uint32_t>(text.size() + 1));
    ParserState state = init_state(schema).advance(text.substr(0, cut));
    if (state.viability() == Viability::Dead) {
      ++dead_prefixes;  // must never happen for prefixes of valid queries
      continue;
    }
    Vocabulary vocab;
    for (int i = 0; i < 10; ++i) {
      vocab.tokens.push_back(pool[bounded_uint(rng, static_cast<std::uint32_t>(pool.size()))]);
    }
    vocab.tokens.push_back("</s>");
    vocab.eos_index = static_cast<int>(vocab.tokens.size()) - 1;
    TokenMask mask = valid_mask(state, vocab);
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
      bool expected;
      if (static_cast<int>(i) == vocab.eos_index) {
        expected = state.viability() == Viability::Complete;
      } else {
        expected = state.advance(vocab.tokens[i]).viability() != Viability::Dead;
      }
      if (mask.allowed[i] != expected) ++mismatched;
      ++checked;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail), "%ld pairs, %ld mismatches, %ld dead prefixes, %.1fs",
                checked, mismatched, dead_prefixes, seconds_since(start));
  report(2, "mask soundness/completeness", mismatched == 0 && dead_prefixes == 0, detail);
}

// Tiny ASTs whose encodings have at most six tree nodes.
SqlAst tiny_ast(std::mt19937& rng) {
  for (;;) {
    static const char* tables[] = {"t", "u"};
    static const char* cols[] = {"a", "b"};
    SqlAst ast;
    ast.from_table = tables[bounded_uint(rng, 2)];
    switch (bounded_uint(rng, 5)) {
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
      case 3:
        ast.select_items.push_back(ColumnRef{std::nullopt, cols[0]});
        ast.select_items.push_back(ColumnRef{std::nullopt, cols[1]});
        break;
      default:
        ast.select_items.push_back(Star{});
        ast.limit = static_cast<std::int64_t>(bounded_uint(rng, 4));
        break;
    }
    if (tree_size(encode_tree(ast)) <= 6) return ast;
  }
}

// 3. TED oracle equivalence on 500 random small AST pairs, identity, and the
// table-vs-column weighting example.
void criterion_ted_oracle() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(3003);
  CostConfig costs;
  int mismatched = 0;
  for (int i = 0; i < 500; ++i) {
    SqlAst a = tiny_ast(rng);
    SqlAst b = tiny_ast(rng);
    TreeNode ta = encode_tree(a), tb = encode_tree(b);
    double fast = ted_trees(ta, tb, costs);
    double slow = testsupport::oracle_ted(ta, tb, costs);
    if (std::abs(fast - slow) > 1e-9) ++mismatched;
    if (ted(a, a, costs) != 0.0) ++mismatched;
  }
  double column_error = ted(parse("SELECT a FROM t"), parse("SELECT b FROM t"), costs);
  double table_error = ted(parse("SELECT a FROM t"), parse("SELECT a FROM u"), costs);
  bool weighting = table_error == 3.0 && column_error == 1.0 && table_error > column_error;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "500 pairs, %d mismatches, table %.1f > column %.1f, %.1fs",
                mismatched, table_error, column_error, seconds_since(start));
  report(3, "TED oracle equivalence", mismatched == 0 && weighting, detail);
}

// 4. Execution-match consistency on 200 random (query, database) cases, plus
// the appendix COUNT fixture.
void criterion_execution_match() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(4004);
  int cases = 0, exceptions = 0;
  int attempts = 0;
  while (cases < 200 && attempts < 4000) {
    ++attempts;
    DataModelSchema schema = random_schema(rng, 3, 4);
    Database db = random_database(rng, schema);
    SqlAst gold = random_query(rng, schema);
    SqlAst pred = bounded_uint(rng, 3) == 0 ? gold : random_query(rng, schema);
    try {
      execute(gold, db);
      execute(pred, db);
    } catch (const Error&) {
      continue;  // aggregate over an empty set etc.; draw another case
    }
    ++cases;
    if (exact_match(gold, pred) && !execution_match(gold, pred, db)) ++exceptions;
  }

  Database cars;
  cars.relations["cars_data"] = Relation{
      {"id", "cylinders"},
      {{std::int64_t{1}, std::int64_t{4}},
       {std::int64_t{2}, std::int64_t{6}},
       {std::int64_t{3}, std::int64_t{8}}}};
  cars.column_types["cars_data"] = {ColumnType::Int, ColumnType::Int};
  Relation out = execute(parse("SELECT COUNT(*) FROM cars_data WHERE cylinders > 4"), cars);
  bool fixture = out.rows.size() == 1 && out.rows[0][0] == Value{std::int64_t{2}};

  char detail[160];
  std::snprintf(detail, sizeof(detail), "%d cases, %d exceptions, COUNT fixture %s, %.1fs", cases,
                exceptions, fixture ? "= 2" : "wrong", seconds_since(start));
  report(4, "execution-match consistency", cases == 200 && exceptions == 0 && fixture, detail);
}

// 5. Template fidelity: the JOIN example extracts verbatim and a 3:1 corpus
// sampled at n=8 yields exactly 6:2.
void criterion_template_fidelity() {
  Template t =
      extract_template(parse("SELECT * FROM User JOIN Account on User.id = Account.user_id"));
  bool example = t.text == "SELECT * FROM [TABLE] JOIN [TABLE] ON [COL] = [COL]";

  std::vector<SqlAst> corpus = {
      parse("SELECT a FROM t"),
      parse("SELECT b FROM t"),
      parse("SELECT c FROM u"),
      parse("SELECT * FROM t"),
  };
  bool quotas = true;
  for (int seed : {0, 1, 2}) {
    auto sample = sample_by_distribution(corpus, 8, seed);
    int one_col = 0, star = 0;
    for (const auto& ast : sample) {
      if (extract_template(ast).text == "SELECT [COL] FROM [TABLE]") {
        ++one_col;
      } else {
        ++star;
      }
    }
    if (one_col != 6 || star != 2) quotas = false;
  }
  report(5, "template fidelity",
         example && quotas,
         "template '" + t.text + "', 3:1 corpus at n=8 sampled 6:2");
}

// 6. Table reproduction: the A/B fixture reproduces 9.6% -> 17.0% (1.8x),
// 1.7% -> 3.7% (2.2x) and 35% -> 6% (0.2x), exactly at rendering precision.
void criterion_table_reproduction() {
  constexpr std::int64_t kEnd = 20'000'000;
  std::vector<TelemetryEvent> events;
  auto seed_variant = [&events](const std::string& variant, int creator_users, int created,
                                int successes, int invalid, double latency) {
    for (int i = 0; i < 1000; ++i) {
      TelemetryEvent e;
      e.kind = EventKind::Exposed;
      e.user_id = "u" + std::to_string(i);
      e.variant = variant;
      e.timestamp = kEnd - 1000;
      events.push_back(e);
    }
    for (int i = 0; i < created; ++i) {
      TelemetryEvent e;
      e.kind = EventKind::AggregateCreated;
      e.user_id = "u" + std::to_string(i % creator_users);
      e.variant = variant;
      e.timestamp = kEnd - 900;
      e.aggregate_id = variant + std::to_string(i);
      events.push_back(e);
      if (i >= successes) {
        TelemetryEvent del = e;
        del.kind = EventKind::AggregateDeleted;
        del.timestamp = kEnd - 800;
        events.push_back(del);
      }
    }
    for (int i = 0; i < 1000; ++i) {
      TelemetryEvent e;
      e.kind = EventKind::SuggestionServed;
      e.user_id = "u";
      e.variant = variant;
      e.timestamp = kEnd - 700;
      e.latency_s = latency;
      events.push_back(e);
    }
    for (int i = 0; i < invalid; ++i) {
      TelemetryEvent e;
      e.kind = EventKind::SuggestionInvalid;
      e.user_id = "u";
      e.variant = variant;
      e.timestamp = kEnd - 600;
      events.push_back(e);
    }
  };
  seed_variant("baseline", 96, 1000, 17, 350, 1.77);
  seed_variant("t5ql", 170, 1000, 37, 60, 1.45);

  AbReport report_ab = ab_report(events, "baseline", "t5ql", kEnd);
  bool adoption = report_ab.control.adoption == 0.096 && report_ab.treatment.adoption == 0.17 &&
                  report_ab.adoption_ratio && report_ab.adoption_ratio->rendered == "1.8x";
  bool engagement = report_ab.control.engagement == 0.017 &&
                    report_ab.treatment.engagement == 0.037 && report_ab.engagement_ratio &&
                    report_ab.engagement_ratio->rendered == "2.2x";
  bool failures_ok = report_ab.control.failure == 0.35 && report_ab.treatment.failure == 0.06 &&
                     report_ab.failure_ratio && report_ab.failure_ratio->rendered == "0.2x";
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "adoption %.1f%%->%.1f%% %s, engagement %.1f%%->%.1f%% %s, failures %.0f%%->%.0f%% %s",
                report_ab.control.adoption * 100, report_ab.treatment.adoption * 100,
                report_ab.adoption_ratio ? report_ab.adoption_ratio->rendered.c_str() : "-",
                report_ab.control.engagement * 100, report_ab.treatment.engagement * 100,
                report_ab.engagement_ratio ? report_ab.engagement_ratio->rendered.c_str() : "-",
                report_ab.control.failure * 100, report_ab.treatment.failure * 100,
                report_ab.failure_ratio ? report_ab.failure_ratio->rendered.c_str() : "-");
  report(6, "A/B table reproduction", adoption && engagement && failures_ok, detail);
}

// 7. Hardness anchor: the appendix query classifies Easy.
void criterion_hardness_anchor() {
  Hardness h = hardness(parse("SELECT COUNT(*) FROM cars_data WHERE cylinders > 4"));
  report(7, "hardness anchor", h == Hardness::Easy,
         std::string("appendix query classified ") + hardness_name(h));
}

// 8. Quality pipeline: a separable 10-point set trains to 100% at depth 1
// and filter_pairs is monotone over 11 thresholds.
void criterion_quality_pipeline() {
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 5; ++i) {
    FeatureVector lo;
    lo.work_time_s = 2.0 + i;
    lo.sql_complexity = Hardness::Easy;
    lo.time_per_complexity = lo.work_time_s;
    lo.levenshtein_nl_sql = 5;
    data.push_back({lo, false});
    FeatureVector hi = lo;
    hi.work_time_s = 60.0 + i;
    hi.time_per_complexity = hi.work_time_s;
    data.push_back({hi, true});
  }
  DecisionTree tree = tree_train(data, 1, 1);
  int correct = 0;
  for (const auto& row : data) {
    if (tree_eval(tree, row.features).first == row.label) ++correct;
  }
  bool separable = correct == static_cast<int>(data.size());

  // threshold sweep over a stump with mixed leaf scores
  DecisionTree stump;
  stump.nodes.push_back({false, false, 0.0, 5, 20.0, 1, 2});
  stump.nodes.push_back({true, true, 0.9, 0, 0.0, -1, -1});
  stump.nodes.push_back({true, false, 0.2, 0, 0.0, -1, -1});
  std::vector<ScoredPair> pairs = {
      {"list users", "SELECT * FROM t", 1.0, 0.0},
      {"all of the user names in the directory", "SELECT name FROM t", 1.0, 0.0},
      {"count rows", "SELECT COUNT(*) FROM t", 1.0, 0.0},
      {"an extremely verbose natural language request", "SELECT a FROM t", 1.0, 0.0},
      {"ids", "SELECT id FROM t", 1.0, 0.0},
      {"the quick brown fox jumps over the lazy sql", "SELECT b FROM u", 1.0, 0.0},
  };
  bool monotone = true;
  std::size_t prev = pairs.size() + 1;
  for (int i = 0; i <= 10; ++i) {
    double threshold = i / 10.0;
    FilterResult r = filter_pairs(pairs, stump, threshold);
    if (r.accepted.size() + r.flagged.size() != pairs.size()) monotone = false;
    if (r.accepted.size() > prev) monotone = false;
    prev = r.accepted.size();
  }
  char detail[120];
  std::snprintf(detail, sizeof(detail), "depth-1 accuracy %d/10, monotone over 11 thresholds: %s",
                correct, monotone ? "yes" : "no");
  report(8, "quality pipeline", separable && monotone, detail);
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  criterion_decoder_validity();
  criterion_mask_soundness();
  criterion_ted_oracle();
  criterion_execution_match();
  criterion_template_fidelity();
  criterion_table_reproduction();
  criterion_hardness_anchor();
  criterion_quality_pipeline();
  std::printf("%s: %d/8 criteria passed in %.1fs\n", failures == 0 ? "OK" : "FAILED", 8 - failures,
              seconds_since(start));
  return failures == 0 ? 0 : 1;
}
