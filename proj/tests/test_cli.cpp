// End-to-end tests of the nl2sql binary: each subcommand over real files,
// exit codes, and the stdout/stderr contract. The binary path arrives via
// NL2SQL_BIN (set by ctest).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nl2sql/parse.hpp"
#include "nl2sql/schema.hpp"
#include "nl2sql/io.hpp"

using Json = nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kDir = "/tmp/nl2sql_cli_fixtures";

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("NL2SQL_BIN");
  REQUIRE(bin != nullptr);
  std::string out_path = kDir + "/stdout.txt";
  std::string err_path = kDir + "/stderr.txt";
  std::string cmd = std::string(bin) + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

void write(const std::string& name, const std::string& content) {
  std::ofstream out(kDir + "/" + name, std::ios::binary);
  out << content;
}

struct FixtureSetup {
  FixtureSetup() {
    std::system(("mkdir -p " + kDir).c_str());
    write("schema.json", R"({"tables":[
      {"name":"User","columns":[{"name":"id","type":"int"},{"name":"country","type":"text"}]},
      {"name":"Account","columns":[{"name":"user_id","type":"int"},{"name":"balance","type":"real"}]}
    ]})");
    write("vocab.json", R"({"tokens":["SELECT ","*"," FROM ","User","Account","country","id",
      " WHERE "," = ","1",", ","</s>"],"eos":11})");
    write("gold.sql", "SELECT country FROM User\n");
    write("pred_same.sql", "select country  from User\n");
    write("pred_other.sql", "SELECT id FROM User\n");
    write("db.json", R"({"tables":{"cars_data":{"columns":["id","cylinders"],
      "rows":[[1,4],[2,6],[3,8]]}}})");
    write("cars.csv", "id,cylinders\n1,4\n2,6\n3,8\n");
    write("corpus.jsonl",
          "{\"sql\":\"SELECT a FROM t\"}\n{\"sql\":\"SELECT b FROM t\"}\n"
          "{\"sql\":\"SELECT c FROM t\"}\n{\"sql\":\"SELECT * FROM t\"}\n");
  }
};

FixtureSetup& fixtures() {
  static FixtureSetup setup;
  return setup;
}

}  // namespace

TEST_CASE("ted on identical files is zero with exit 0", "[cli]") {
  fixtures();
  CliResult r = run_cli("ted --gold " + kDir + "/gold.sql --pred " + kDir + "/pred_same.sql");
  REQUIRE(r.exit_code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["ted"] == 0.0);
  CHECK(r.err.empty());
}

TEST_CASE("ted respects a custom cost file", "[cli]") {
  fixtures();
  write("costs.json", R"({"column":{"insert":5,"delete":5,"relabel":4}})");
  CliResult r = run_cli("ted --gold " + kDir + "/gold.sql --pred " + kDir +
                        "/pred_other.sql --costs " + kDir + "/costs.json");
  REQUIRE(r.exit_code == 0);
  CHECK(Json::parse(r.out)["ted"] == 4.0);
}

TEST_CASE("parse prints canonical SQL and violations", "[cli]") {
  fixtures();
  CliResult r = run_cli("parse --sql \"select id,   country from User\" --schema " + kDir +
                        "/schema.json");
  REQUIRE(r.exit_code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["canonical"] == "SELECT id, country FROM User");
  CHECK(j["violations"].empty());

  CliResult bad = run_cli("parse --sql \"SELECT missing FROM User\" --schema " + kDir +
                          "/schema.json");
  REQUIRE(bad.exit_code == 0);
  Json bj = Json::parse(bad.out);
  REQUIRE(bj["violations"].size() == 1);
  CHECK(bj["violations"][0]["kind"] == "UnknownColumn");
}

TEST_CASE("domain errors exit 1 with a JSON line on stderr", "[cli]") {
  fixtures();
  CliResult r = run_cli("parse --sql \"SELECT FROM User\"");
  REQUIRE(r.exit_code == 1);
  CHECK(r.out.empty());
  Json err = Json::parse(r.err);
  CHECK(err["error"]["kind"] == "SyntaxError");
}

TEST_CASE("usage errors exit 2", "[cli]") {
  fixtures();
  CliResult r = run_cli("no-such-subcommand");
  REQUIRE(r.exit_code == 2);
}

TEST_CASE("mask lists allowed token indices", "[cli]") {
  fixtures();
  CliResult r = run_cli("mask --schema " + kDir + "/schema.json --vocab " + kDir +
                        "/vocab.json --prefix \"SELECT * FROM \"");
  REQUIRE(r.exit_code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["viability"] == "Viable");
  std::vector<int> allowed = j["allowed"].get<std::vector<int>>();
  CHECK(std::find(allowed.begin(), allowed.end(), 3) != allowed.end());  // User
  CHECK(std::find(allowed.begin(), allowed.end(), 4) != allowed.end());  // Account
  CHECK(std::find(allowed.begin(), allowed.end(), 0) == allowed.end());  // SELECT again
  CHECK(std::find(allowed.begin(), allowed.end(), 11) == allowed.end());  // eos
}

TEST_CASE("decode emits schema-valid candidates for both scorers", "[cli]") {
  fixtures();
  nl2sql::DataModelSchema schema =
      nl2sql::schema_from_json(Json::parse(slurp(kDir + "/schema.json")));
  for (std::string scorer : {"uniform", "ngram"}) {
    std::string extra = scorer == "ngram" ? " --train-corpus " + kDir + "/decode_corpus.jsonl" : "";
    if (scorer == "ngram") {
      write("decode_corpus.jsonl", "{\"sql\":\"SELECT country FROM User\"}\n");
    }
    CliResult r = run_cli("decode --schema " + kDir + "/schema.json --vocab " + kDir +
                          "/vocab.json --nl \"give me users\" --scorer " + scorer +
                          " --beam 3 --max-tokens 16" + extra);
    CAPTURE(scorer, r.err);
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    REQUIRE(j["candidates"].size() >= 1);
    for (const auto& cand : j["candidates"]) {
      nl2sql::SqlAst ast = nl2sql::parse(cand["sql"].get<std::string>());
      CHECK(nl2sql::validate_against_schema(ast, schema).empty());
    }
  }
}

TEST_CASE("exec runs against JSON and CSV databases", "[cli]") {
  fixtures();
  CliResult r = run_cli("exec --sql \"SELECT COUNT(*) FROM cars_data WHERE cylinders > 4\" --db " +
                        kDir + "/db.json");
  REQUIRE(r.exit_code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["rows"][0][0] == 2);

  CliResult csv = run_cli("exec --sql \"SELECT COUNT(*) FROM cars_data WHERE cylinders > 4\" --csv cars_data=" +
                          kDir + "/cars.csv");
  REQUIRE(csv.exit_code == 0);
  CHECK(Json::parse(csv.out)["rows"][0][0] == 2);
}

TEST_CASE("template subcommands", "[cli]") {
  fixtures();
  CliResult ext = run_cli(
      "template extract --sql \"SELECT * FROM User JOIN Account ON User.id = Account.user_id\"");
  REQUIRE(ext.exit_code == 0);
  CHECK(Json::parse(ext.out)["template"] == "SELECT * FROM [TABLE] JOIN [TABLE] ON [COL] = [COL]");

  CliResult dist = run_cli("template dist --corpus " + kDir + "/corpus.jsonl");
  REQUIRE(dist.exit_code == 0);
  Json dj = Json::parse(dist.out);
  CHECK(dj["SELECT [COL] FROM [TABLE]"]["count"] == 3);
  CHECK(dj["SELECT [COL] FROM [TABLE]"]["frequency"] == 0.75);

  CliResult s1 = run_cli("template sample --corpus " + kDir + "/corpus.jsonl -n 8 --seed 7");
  CliResult s2 = run_cli("template sample --corpus " + kDir + "/corpus.jsonl -n 8 --seed 7");
  REQUIRE(s1.exit_code == 0);
  CHECK(s1.out == s2.out);  // byte-identical across runs
  int one_col = 0, star = 0;
  std::istringstream lines(s1.out);
  std::string line;
  while (std::getline(lines, line)) {
    Json j = Json::parse(line);
    std::string sql = j["sql"].get<std::string>();
    if (sql.find('*') != std::string::npos) {
      ++star;
    } else {
      ++one_col;
    }
  }
  CHECK(one_col == 6);
  CHECK(star == 2);
}

TEST_CASE("qe feature extraction, training and scoring", "[cli]") {
  fixtures();
  CliResult feats = run_cli(
      "qe features --nl \"more than 4 cylinders count\" "
      "--sql \"SELECT COUNT(*) FROM cars_data WHERE cylinders > 4\" --work-time 30");
  REQUIRE(feats.exit_code == 0);
  Json fj = Json::parse(feats.out);
  CHECK(fj["sql_complexity"] == "Easy");
  CHECK(fj["terminals_in_nl"] == true);
  CHECK(fj["time_per_complexity"] == 30.0);

  // ten separable pairs: long work time means a good label
  std::string pairs;
  for (int i = 0; i < 5; ++i) {
    pairs += "{\"nl\":\"list all user countries now\",\"sql\":\"SELECT country FROM User\","
             "\"work_time_s\":" + std::to_string(40 + i) + ",\"label\":true}\n";
    pairs += "{\"nl\":\"list all user countries now\",\"sql\":\"SELECT country FROM User\","
             "\"work_time_s\":" + std::to_string(2 + i) + ",\"label\":false}\n";
  }
  write("train_pairs.jsonl", pairs);
  CliResult train = run_cli("qe train --pairs " + kDir + "/train_pairs.jsonl --max-depth 1 --out " +
                            kDir + "/tree.json");
  REQUIRE(train.exit_code == 0);

  CliResult score = run_cli("qe score --pairs " + kDir + "/train_pairs.jsonl --tree " + kDir +
                            "/tree.json --threshold 0.5");
  REQUIRE(score.exit_code == 0);
  Json sj = Json::parse(score.out);
  CHECK(sj["accepted"].size() == 5);
  CHECK(sj["flagged"].size() == 5);
}

TEST_CASE("feedback build and worst", "[cli]") {
  fixtures();
  write("records.jsonl",
        "{\"nl\":\"show user countries\",\"predicted_sql\":\"SELECT id FROM User\","
        "\"final_sql\":\"SELECT country FROM User\",\"edited\":true,\"deleted\":false,"
        "\"timestamp\":\"2024-05-01T10:00:00Z\",\"user_id\":\"u1\"}\n"
        "{\"nl\":\"all accounts\",\"predicted_sql\":\"SELECT * FROM Account\","
        "\"final_sql\":\"SELECT * FROM Account\",\"edited\":false,\"deleted\":false,"
        "\"timestamp\":\"2024-05-01T11:00:00Z\",\"user_id\":\"u2\"}\n");
  CliResult build = run_cli("feedback build --records " + kDir +
                            "/records.jsonl --scorer overlap --threshold 0.4");
  REQUIRE(build.exit_code == 0);
  Json line = Json::parse(build.out.substr(0, build.out.find('\n')));
  CHECK(line["nl"] == "show user countries");
  CHECK(line["sql"] == "SELECT country FROM User");

  write("report.json", R"({"templates":[
    {"template":"SELECT * FROM [TABLE]","count":5,"mean_ted":0.5,"exact_match_rate":0.8},
    {"template":"SELECT [COL] FROM [TABLE]","count":5,"mean_ted":3.5,"exact_match_rate":0.1}],
    "micro":{"mean_ted":2.0,"exact_match_rate":0.45},
    "macro":{"mean_ted":2.0,"exact_match_rate":0.45},
    "latency":{"p50":0.1,"p90":0.2,"p99":0.3}})");
  CliResult worst = run_cli("feedback worst --report " + kDir + "/report.json -k 1");
  REQUIRE(worst.exit_code == 0);
  CHECK(Json::parse(worst.out)["templates"][0]["template"] == "SELECT [COL] FROM [TABLE]");
}

TEST_CASE("metrics rates and ab-report", "[cli]") {
  fixtures();
  std::string events;
  auto add = [&events](const std::string& kind, const std::string& user, const std::string& variant,
                       const std::string& ts, const std::string& extra = "") {
    events += "{\"kind\":\"" + kind + "\",\"user_id\":\"" + user + "\",\"variant\":\"" + variant +
              "\",\"timestamp\":\"" + ts + "\"" + extra + "}\n";
  };
  for (int i = 0; i < 10; ++i) {
    add("Exposed", "u" + std::to_string(i), "A", "2024-06-10T00:00:00Z");
    add("Exposed", "u" + std::to_string(i), "B", "2024-06-10T00:00:00Z");
  }
  add("AggregateCreated", "u1", "A", "2024-06-11T00:00:00Z", ",\"aggregate_id\":\"a1\"");
  add("AggregateCreated", "u1", "B", "2024-06-11T00:00:00Z", ",\"aggregate_id\":\"b1\"");
  add("AggregateCreated", "u2", "B", "2024-06-11T00:00:00Z", ",\"aggregate_id\":\"b2\"");
  add("SuggestionServed", "u1", "A", "2024-06-11T01:00:00Z", ",\"latency_s\":2.0");
  add("SuggestionServed", "u1", "B", "2024-06-11T01:00:00Z", ",\"latency_s\":1.0");
  write("events.jsonl", events);

  CliResult rates = run_cli("metrics rates --events " + kDir +
                            "/events.jsonl --variant B --window-end 2024-06-30T00:00:00Z");
  REQUIRE(rates.exit_code == 0);
  Json rj = Json::parse(rates.out);
  CHECK(rj["adoption"] == 0.2);
  CHECK(rj["latency"]["p50"] == 1.0);

  CliResult ab = run_cli("metrics ab-report --events " + kDir +
                         "/events.jsonl --control A --treatment B --window-end 2024-06-30T00:00:00Z");
  REQUIRE(ab.exit_code == 0);
  Json aj = Json::parse(ab.out);
  CHECK(aj["ratios"]["adoption"]["rendered"] == "2.0x");
  CHECK(aj["control"]["metrics"]["adoption"] == 0.1);
}

TEST_CASE("grammar print writes the EBNF reference", "[cli]") {
  fixtures();
  CliResult r = run_cli("grammar print");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("select-list") != std::string::npos);
}
