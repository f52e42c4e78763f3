#include <catch2/catch_amalgamated.hpp>

#include "nl2sql/feedback.hpp"

using namespace nl2sql;

namespace {

InteractionRecord record(const std::string& nl, const std::string& predicted,
                         const std::string& final_sql, std::int64_t ts, bool deleted = false) {
  InteractionRecord rec;
  rec.nl = nl;
  rec.predicted_sql = predicted;
  rec.final_sql = final_sql;
  rec.deleted = deleted;
  rec.timestamp = ts;
  rec.user_id = "u1";
  rec.edited = !deleted && serialize(parse(predicted)) != serialize(parse(final_sql));
  return rec;
}

}  // namespace

TEST_CASE("interaction classification", "[feedback]") {
  InteractionRecord kept = record("q", "SELECT * FROM t", "SELECT * FROM t", 10);
  CHECK(classify_interaction(kept, 0.9, 0.5) == InteractionCase::UneditedKept);

  InteractionRecord edited = record("q", "SELECT * FROM t", "SELECT a FROM t", 11);
  CHECK(classify_interaction(edited, 0.9, 0.5) == InteractionCase::EditedAccepted);
  CHECK(classify_interaction(edited, 0.2, 0.5) == InteractionCase::EditedRejected);

  InteractionRecord gone = record("q", "SELECT * FROM t", "SELECT * FROM t", 12, true);
  CHECK(classify_interaction(gone, 0.9, 0.5) == InteractionCase::Deleted);

  // canonicalization drives the edited flag: whitespace-only changes are not edits
  InteractionRecord spaced = record("q", "select *  from t", "SELECT * FROM t", 13);
  CHECK_FALSE(spaced.edited);
}

TEST_CASE("training set keeps the argmax version above threshold", "[feedback]") {
  PairScorer scorer = [](const std::string&, const std::string& sql) {
    if (sql.find("LIMIT 2") != std::string::npos) return 0.8;
    if (sql.find("LIMIT 3") != std::string::npos) return 0.6;
    return 0.3;
  };
  std::vector<InteractionRecord> records = {
      record("q", "SELECT * FROM t", "SELECT * FROM t LIMIT 1", 1),
      record("q", "SELECT * FROM t", "SELECT * FROM t LIMIT 2", 2),
      record("q", "SELECT * FROM t", "SELECT * FROM t LIMIT 3", 3),
  };
  auto out = build_training_set(records, scorer, 0.5);
  REQUIRE(out.size() == 1);
  CHECK(out[0].nl == "q");
  CHECK(out[0].sql == "SELECT * FROM t LIMIT 2");

  SECTION("all below threshold yields an empty set") {
    CHECK(build_training_set(records, scorer, 0.95).empty());
  }
  SECTION("single edited record above threshold is emitted") {
    std::vector<InteractionRecord> one = {records[1]};
    auto pairs = build_training_set(one, scorer, 0.5);
    REQUIRE(pairs.size() == 1);
  }
}

TEST_CASE("score ties break toward the latest timestamp", "[feedback]") {
  PairScorer constant = [](const std::string&, const std::string&) { return 0.7; };
  std::vector<InteractionRecord> records = {
      record("q", "SELECT * FROM t", "SELECT a FROM t", 5),
      record("q", "SELECT * FROM t", "SELECT b FROM t", 9),
      record("q", "SELECT * FROM t", "SELECT c FROM t", 7),
  };
  auto out = build_training_set(records, constant, 0.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].sql == "SELECT b FROM t");
}

TEST_CASE("unedited and deleted records never contribute", "[feedback]") {
  PairScorer constant = [](const std::string&, const std::string&) { return 1.0; };
  std::vector<InteractionRecord> records = {
      record("kept", "SELECT * FROM t", "SELECT * FROM t", 1),
      record("gone", "SELECT * FROM t", "SELECT a FROM t", 2, true),
      record("used", "SELECT * FROM t", "SELECT a FROM t", 3),
  };
  auto out = build_training_set(records, constant, 0.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].nl == "used");
}

TEST_CASE("raising the threshold never grows the output", "[feedback]") {
  PairScorer scorer = [](const std::string& nl, const std::string&) {
    return nl.size() / 10.0;  // scores 0.1 .. 0.9 by NL length
  };
  std::vector<InteractionRecord> records;
  for (int i = 1; i <= 9; ++i) {
    records.push_back(record(std::string(static_cast<std::size_t>(i), 'q'), "SELECT * FROM t",
                             "SELECT a FROM t LIMIT " + std::to_string(i), 100 + i));
  }
  std::size_t prev = records.size() + 1;
  for (double threshold = 0.0; threshold <= 1.01; threshold += 0.1) {
    auto out = build_training_set(records, scorer, threshold);
    CHECK(out.size() <= prev);
    prev = out.size();
  }
}

TEST_CASE("output is sorted by template then timestamp", "[feedback]") {
  PairScorer constant = [](const std::string&, const std::string&) { return 1.0; };
  std::vector<InteractionRecord> records = {
      record("q1", "SELECT * FROM t", "SELECT a, b FROM t", 9),
      record("q2", "SELECT * FROM t", "SELECT a FROM t", 5),
      record("q3", "SELECT * FROM t", "SELECT b FROM u", 3),
  };
  auto out = build_training_set(records, constant, 0.0);
  REQUIRE(out.size() == 3);
  // the one-column template sorts before the two-column one
  CHECK(out[0].sql == "SELECT b FROM u");   // one-col template, ts 3
  CHECK(out[1].sql == "SELECT a FROM t");   // one-col template, ts 5
  CHECK(out[2].sql == "SELECT a, b FROM t");
}

TEST_CASE("worst template selection", "[feedback]") {
  EvalReport report;
  report.templates.push_back({"SELECT * FROM [TABLE]", 10, 0.5, 0.9, std::nullopt});
  report.templates.push_back({"SELECT [COL] FROM [TABLE]", 10, 4.0, 0.2, std::nullopt});
  report.templates.push_back({"SELECT COUNT(*) FROM [TABLE]", 10, 4.0, 0.1, std::nullopt});

  SECTION("highest mean TED first") {
    auto worst = select_worst_templates(report, 1);
    REQUIRE(worst.size() == 1);
    // equal TED means tie-break on the lower exact-match rate
    CHECK(worst[0].text == "SELECT COUNT(*) FROM [TABLE]");
  }
  SECTION("k clips to the available count and sorts descending") {
    auto worst = select_worst_templates(report, 10);
    REQUIRE(worst.size() == 3);
    CHECK(worst[0].text == "SELECT COUNT(*) FROM [TABLE]");
    CHECK(worst[1].text == "SELECT [COL] FROM [TABLE]");
    CHECK(worst[2].text == "SELECT * FROM [TABLE]");
  }
  SECTION("empty report is an error") {
    EvalReport empty;
    REQUIRE_THROWS_AS(select_worst_templates(empty, 1), EmptyInputError);
  }
}
