#pragma once

// File formats. Everything is JSON or JSONL; timestamps are ISO-8601 UTC.
//
//   schema:   {"tables":[{"name":..., "columns":[{"name":..., "type":...}]}]}
//   vocab:    {"tokens":[...], "eos": <index>, "bos": <index, optional>}
//   database: {"tables": {<name>: {"columns":[...], "rows":[[...], ...]}}}
//             (columns are names or {"name","type"}; types otherwise
//              inferred from the first row)
//   costs:    {<node-class>: {"insert":..,"delete":..,"relabel":..}}
//   lexicons: {"directions":[...], "limit":[...]}
//   tree:     {"max_depth":.., "root": <node>} with nested {"feature",
//             "threshold","left","right"} internals and {"class","score"}
//             leaves
//   corpus:   JSONL, one {"sql": "..."} per line
//   pairs:    JSONL {"nl","sql","work_time_s","label"}
//   records:  JSONL {"nl","predicted_sql","final_sql","edited","deleted",
//             "timestamp","user_id"[,"schema"]}
//   events:   JSONL {"kind","user_id","variant","timestamp"[,"latency_s"]
//             [,"aggregate_id"]}
//   eval rows: JSONL {"gold","pred","latency_s"}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nl2sql/ast.hpp"
#include "nl2sql/decoding.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/eval.hpp"
#include "nl2sql/exec.hpp"
#include "nl2sql/feedback.hpp"
#include "nl2sql/quality.hpp"
#include "nl2sql/schema.hpp"
#include "nl2sql/telemetry.hpp"
#include "nl2sql/ted.hpp"

namespace nl2sql {

using Json = nlohmann::json;

// ---- time ------------------------------------------------------------------

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS", optional trailing "Z" or
// "+HH:MM"/"-HH:MM" offset, or a bare integer epoch-seconds value.
inline std::int64_t parse_instant(const std::string& text) {
  const bool bare_integer = !text.empty() && is_digit(text[0]) && text.find('-') == std::string::npos;
  if (bare_integer) {
    try {
      return std::stoll(text);
    } catch (...) {
      throw IoError("invalid timestamp '" + text + "'");
    }
  }
  auto fail = [&text]() -> std::int64_t { throw IoError("invalid ISO-8601 timestamp '" + text + "'"); };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return fail();
  auto num = [&text, &fail](std::size_t at, std::size_t len) {
    std::int64_t v = 0;
    for (std::size_t i = at; i < at + len; ++i) {
      if (i >= text.size() || text[i] < '0' || text[i] > '9') return fail();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  std::int64_t year = num(0, 4);
  int month = static_cast<int>(num(5, 2));
  int day = static_cast<int>(num(8, 2));
  if (month < 1 || month > 12 || day < 1 || day > 31) return fail();
  std::int64_t seconds = days_from_civil(year, month, day) * 86400;
  std::size_t rest = 10;
  if (rest < text.size() && (text[rest] == 'T' || text[rest] == ' ')) {
    if (text.size() < rest + 9 || text[rest + 3] != ':' || text[rest + 6] != ':') return fail();
    seconds += num(rest + 1, 2) * 3600 + num(rest + 4, 2) * 60 + num(rest + 7, 2);
    rest += 9;
  }
  if (rest < text.size()) {
    char c = text[rest];
    if (c == 'Z' && rest + 1 == text.size()) {
      // UTC marker
    } else if ((c == '+' || c == '-') && text.size() == rest + 6 && text[rest + 3] == ':') {
      std::int64_t offset = num(rest + 1, 2) * 3600 + num(rest + 4, 2) * 60;
      seconds += (c == '+') ? -offset : offset;
    } else {
      return fail();
    }
  }
  return seconds;
}

inline std::string format_instant(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  // inverse of days_from_civil
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
  const std::int64_t m = mp + (mp < 10 ? 3 : -9);
  y += (m <= 2);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lldT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), static_cast<long long>(m), static_cast<long long>(d),
                static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return std::string(buf);
}

// ---- helpers -----------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

inline Json parse_json(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + what);
  return j;
}

// Calls fn(json) for each nonempty line.
template <typename Fn>
inline void for_each_jsonl(const std::string& text, const std::string& what, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw IoError("malformed JSON on line " + std::to_string(lineno) + " of " + what);
    }
    fn(j);
  }
}

// ---- schema --------------------------------------------------------------------

inline DataModelSchema schema_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("tables") || !j["tables"].is_array()) {
    throw IoError("schema JSON must be {\"tables\": [...]}");
  }
  DataModelSchema schema;
  for (const auto& tj : j["tables"]) {
    TableDef table;
    table.name = tj.at("name").get<std::string>();
    for (const auto& cj : tj.at("columns")) {
      ColumnDef col;
      col.name = cj.at("name").get<std::string>();
      std::string type = cj.at("type").get<std::string>();
      auto parsed = column_type_from_name(type);
      if (!parsed) throw IoError("unknown column type '" + type + "'");
      col.type = *parsed;
      table.columns.push_back(std::move(col));
    }
    schema.tables.push_back(std::move(table));
  }
  return schema;
}

inline Json schema_to_json(const DataModelSchema& schema) {
  Json tables = Json::array();
  for (const auto& table : schema.tables) {
    Json cols = Json::array();
    for (const auto& col : table.columns) {
      cols.push_back({{"name", col.name}, {"type", column_type_name(col.type)}});
    }
    tables.push_back({{"name", table.name}, {"columns", cols}});
  }
  return Json{{"tables", tables}};
}

inline DataModelSchema load_schema(const std::string& path) {
  return schema_from_json(parse_json(read_file(path), "schema file '" + path + "'"));
}

// ---- vocabulary -------------------------------------------------------------------

inline Vocabulary vocabulary_from_json(const Json& j) {
  Vocabulary vocab;
  if (!j.is_object() || !j.contains("tokens") || !j.contains("eos")) {
    throw IoError("vocabulary JSON must be {\"tokens\": [...], \"eos\": <index>}");
  }
  for (const auto& t : j["tokens"]) vocab.tokens.push_back(t.get<std::string>());
  vocab.eos_index = j["eos"].get<int>();
  if (j.contains("bos")) vocab.bos_index = j["bos"].get<int>();
  vocab.validate();
  return vocab;
}

inline Json vocabulary_to_json(const Vocabulary& vocab) {
  Json j{{"tokens", vocab.tokens}, {"eos", vocab.eos_index}};
  if (vocab.bos_index) j["bos"] = *vocab.bos_index;
  return j;
}

inline Vocabulary load_vocabulary(const std::string& path) {
  return vocabulary_from_json(parse_json(read_file(path), "vocabulary file '" + path + "'"));
}

// ---- database ----------------------------------------------------------------------

inline Value value_from_json(const Json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw IoError("database cells must be int, real, text or bool (no nulls)");
}

inline Json value_to_json(const Value& v) {
  switch (v.index()) {
    case 0: return std::get<std::int64_t>(v);
    case 1: return std::get<double>(v);
    case 2: return std::get<std::string>(v);
    default: return std::get<bool>(v);
  }
}

inline Database database_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("tables") || !j["tables"].is_object()) {
    throw IoError("database JSON must be {\"tables\": {name: {...}}}");
  }
  Database db;
  for (const auto& [name, tj] : j["tables"].items()) {
    Relation rel;
    std::vector<ColumnType> types;
    std::vector<bool> type_known;
    for (const auto& cj : tj.at("columns")) {
      if (cj.is_string()) {
        rel.columns.push_back(cj.get<std::string>());
        types.push_back(ColumnType::Text);
        type_known.push_back(false);
      } else {
        rel.columns.push_back(cj.at("name").get<std::string>());
        std::string type = cj.at("type").get<std::string>();
        auto parsed = column_type_from_name(type);
        if (!parsed) throw IoError("unknown column type '" + type + "'");
        types.push_back(*parsed);
        type_known.push_back(true);
      }
    }
    for (const auto& rj : tj.at("rows")) {
      std::vector<Value> row;
      if (rj.size() != rel.columns.size()) {
        throw IoError("row width mismatch in table '" + name + "'");
      }
      for (const auto& cell : rj) row.push_back(value_from_json(cell));
      rel.rows.push_back(std::move(row));
    }
    // infer missing types from the first row; verify every cell
    for (std::size_t c = 0; c < rel.columns.size(); ++c) {
      if (!type_known[c] && !rel.rows.empty()) types[c] = value_type(rel.rows[0][c]);
    }
    for (const auto& row : rel.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        ColumnType cell = value_type(row[c]);
        bool ok = cell == types[c] || (types[c] == ColumnType::Real && cell == ColumnType::Int);
        if (!ok) {
          throw IoError("cell type mismatch in table '" + name + "', column '" + rel.columns[c] + "'");
        }
      }
    }
    db.relations[name] = std::move(rel);
    db.column_types[name] = std::move(types);
  }
  return db;
}

inline Json relation_to_json(const Relation& rel) {
  Json rows = Json::array();
  for (const auto& row : rel.rows) {
    Json jr = Json::array();
    for (const auto& v : row) jr.push_back(value_to_json(v));
    rows.push_back(jr);
  }
  return Json{{"columns", rel.columns}, {"rows", rows}};
}

inline Database load_database(const std::string& path) {
  return database_from_json(parse_json(read_file(path), "database file '" + path + "'"));
}

// CSV table: first line is the header; cells parse as int, then real, then
// TRUE/FALSE, falling back to text. No quoting or embedded commas.
inline void load_csv_table(Database& db, const std::string& table, const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("CSV table '" + table + "' is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    cells.push_back(cur);
    return cells;
  };
  Relation rel;
  rel.columns = split(line);
  auto parse_cell = [](const std::string& cell) -> Value {
    if (!cell.empty()) {
      bool numeric = true, dot = false;
      for (std::size_t i = 0; i < cell.size(); ++i) {
        char c = cell[i];
        if (c == '.' && !dot && i > 0) {
          dot = true;
        } else if (!is_digit(c) && !(i == 0 && c == '-' && cell.size() > 1)) {
          numeric = false;
          break;
        }
      }
      if (numeric && !dot) return static_cast<std::int64_t>(std::stoll(cell));
      if (numeric && dot) return std::stod(cell);
      if (iequals(cell, "true")) return true;
      if (iequals(cell, "false")) return false;
    }
    return cell;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != rel.columns.size()) {
      throw IoError("CSV row width mismatch in table '" + table + "'");
    }
    std::vector<Value> row;
    for (const auto& cell : cells) row.push_back(parse_cell(cell));
    rel.rows.push_back(std::move(row));
  }
  std::vector<ColumnType> types(rel.columns.size(), ColumnType::Text);
  if (!rel.rows.empty()) {
    for (std::size_t c = 0; c < rel.columns.size(); ++c) types[c] = value_type(rel.rows[0][c]);
  }
  db.relations[table] = std::move(rel);
  db.column_types[table] = std::move(types);
}

// ---- cost config -----------------------------------------------------------------------

inline CostConfig cost_config_from_json(const Json& j) {
  CostConfig costs;
  auto apply = [&j](const char* key, ClassCosts& slot) {
    if (!j.contains(key)) return;
    const Json& cj = j.at(key);
    if (cj.contains("insert")) slot.insert = cj["insert"].get<double>();
    if (cj.contains("delete")) slot.del = cj["delete"].get<double>();
    if (cj.contains("relabel")) slot.relabel = cj["relabel"].get<double>();
  };
  apply("table", costs.table);
  apply("column", costs.column);
  apply("literal", costs.literal);
  apply("operator", costs.op);
  apply("aggregate_func", costs.aggregate_func);
  apply("clause", costs.clause);
  costs.validate();
  return costs;
}

inline Json cost_config_to_json(const CostConfig& costs) {
  auto one = [](const ClassCosts& c) {
    return Json{{"insert", c.insert}, {"delete", c.del}, {"relabel", c.relabel}};
  };
  return Json{
      {"table", one(costs.table)},           {"column", one(costs.column)},
      {"literal", one(costs.literal)},       {"operator", one(costs.op)},
      {"aggregate_func", one(costs.aggregate_func)}, {"clause", one(costs.clause)},
  };
}

inline CostConfig load_cost_config(const std::string& path) {
  return cost_config_from_json(parse_json(read_file(path), "cost config '" + path + "'"));
}

// ---- lexicons ---------------------------------------------------------------------------

inline Lexicons lexicons_from_json(const Json& j) {
  Lexicons lex = Lexicons::defaults();
  if (j.contains("directions")) {
    lex.directions.clear();
    for (const auto& w : j["directions"]) lex.directions.push_back(to_lower(w.get<std::string>()));
  }
  if (j.contains("limit")) {
    lex.limit_words.clear();
    for (const auto& w : j["limit"]) lex.limit_words.push_back(to_lower(w.get<std::string>()));
  }
  if (lex.directions.empty() || lex.limit_words.empty()) {
    throw IoError("lexicon word lists must be nonempty");
  }
  return lex;
}

inline Lexicons load_lexicons(const std::string& path) {
  return lexicons_from_json(parse_json(read_file(path), "lexicon file '" + path + "'"));
}

// ---- decision tree -------------------------------------------------------------------------

namespace detail {

inline int tree_node_from_json(const Json& j, DecisionTree& tree) {
  int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("class")) {
    DecisionTree::Node& n = tree.nodes.back();
    n.is_leaf = true;
    n.klass = j.at("class").get<bool>();
    n.score = j.at("score").get<double>();
    if (n.score < 0.0 || n.score > 1.0) throw IoError("leaf score must be in [0,1]");
    return index;
  }
  std::size_t feature = j.at("feature").get<std::size_t>();
  if (feature >= FeatureVector::kFeatureCount) throw IoError("feature index out of range");
  double threshold = j.at("threshold").get<double>();
  int left = tree_node_from_json(j.at("left"), tree);
  int right = tree_node_from_json(j.at("right"), tree);
  DecisionTree::Node& n = tree.nodes[static_cast<std::size_t>(index)];
  n.is_leaf = false;
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return index;
}

inline Json tree_node_to_json(const DecisionTree& tree, int index) {
  const DecisionTree::Node& n = tree.nodes[static_cast<std::size_t>(index)];
  if (n.is_leaf) return Json{{"class", n.klass}, {"score", n.score}};
  return Json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", tree_node_to_json(tree, n.left)},
              {"right", tree_node_to_json(tree, n.right)}};
}

}  // namespace detail

inline DecisionTree tree_from_json(const Json& j) {
  DecisionTree tree;
  tree.max_depth = j.contains("max_depth") ? j["max_depth"].get<std::size_t>() : 1;
  detail::tree_node_from_json(j.at("root"), tree);
  return tree;
}

inline Json tree_to_json(const DecisionTree& tree) {
  return Json{{"max_depth", tree.max_depth}, {"root", detail::tree_node_to_json(tree, 0)}};
}

inline DecisionTree load_tree(const std::string& path) {
  return tree_from_json(parse_json(read_file(path), "tree file '" + path + "'"));
}

// ---- JSONL corpora ---------------------------------------------------------------------------

inline std::vector<SqlAst> load_corpus(const std::string& path) {
  std::vector<SqlAst> corpus;
  for_each_jsonl(read_file(path), "corpus '" + path + "'", [&corpus](const Json& j) {
    corpus.push_back(parse(j.at("sql").get<std::string>()));
  });
  if (corpus.empty()) throw EmptyInputError("corpus '" + path + "' has no entries");
  return corpus;
}

struct LabeledPair {
  std::string nl;
  std::string sql;
  double work_time_s = 0.0;
  bool label = false;
};

inline std::vector<LabeledPair> load_labeled_pairs(const std::string& path) {
  std::vector<LabeledPair> pairs;
  for_each_jsonl(read_file(path), "pairs '" + path + "'", [&pairs](const Json& j) {
    LabeledPair p;
    p.nl = j.at("nl").get<std::string>();
    p.sql = j.at("sql").get<std::string>();
    p.work_time_s = j.value("work_time_s", 0.0);
    p.label = j.value("label", false);
    pairs.push_back(std::move(p));
  });
  return pairs;
}

inline std::vector<InteractionRecord> load_interaction_records(const std::string& path) {
  std::vector<InteractionRecord> records;
  for_each_jsonl(read_file(path), "records '" + path + "'", [&records](const Json& j) {
    InteractionRecord rec;
    rec.nl = j.at("nl").get<std::string>();
    rec.predicted_sql = j.at("predicted_sql").get<std::string>();
    rec.final_sql = j.value("final_sql", rec.predicted_sql);
    rec.deleted = j.value("deleted", false);
    rec.timestamp = j.contains("timestamp") && j["timestamp"].is_string()
                        ? parse_instant(j["timestamp"].get<std::string>())
                        : j.value("timestamp", static_cast<std::int64_t>(0));
    rec.user_id = j.value("user_id", std::string{});
    if (j.contains("schema")) rec.schema = schema_from_json(j["schema"]);
    // SQL fields must parse; edited must match the canonical comparison
    SqlAst predicted = parse(rec.predicted_sql);
    SqlAst final_ast = parse(rec.final_sql);
    bool differs = serialize(predicted) != serialize(final_ast);
    if (j.contains("edited")) {
      rec.edited = j["edited"].get<bool>();
      if (!rec.deleted && rec.edited != differs) {
        throw IoError("record invariant violated: edited flag does not match the SQL pair");
      }
    } else {
      rec.edited = differs;
    }
    records.push_back(std::move(rec));
  });
  return records;
}

inline std::vector<TelemetryEvent> load_events(const std::string& path) {
  std::vector<TelemetryEvent> events;
  for_each_jsonl(read_file(path), "events '" + path + "'", [&events](const Json& j) {
    TelemetryEvent e;
    std::string kind = j.at("kind").get<std::string>();
    auto parsed = event_kind_from_name(kind);
    if (!parsed) throw IoError("unknown event kind '" + kind + "'");
    e.kind = *parsed;
    e.user_id = j.at("user_id").get<std::string>();
    e.variant = j.at("variant").get<std::string>();
    e.timestamp = j["timestamp"].is_string() ? parse_instant(j["timestamp"].get<std::string>())
                                             : j.at("timestamp").get<std::int64_t>();
    if (j.contains("latency_s")) e.latency_s = j["latency_s"].get<double>();
    if (j.contains("aggregate_id")) e.aggregate_id = j["aggregate_id"].get<std::string>();
    if ((e.kind == EventKind::SuggestionServed) != e.latency_s.has_value()) {
      throw IoError("latency_s must be present exactly on SuggestionServed events");
    }
    events.push_back(std::move(e));
  });
  return events;
}

struct EvalRowText {
  std::string gold;
  std::string pred;
  double latency_s = 0.0;
};

inline std::vector<EvalRow> load_eval_rows(const std::string& path) {
  std::vector<EvalRow> rows;
  for_each_jsonl(read_file(path), "eval rows '" + path + "'", [&rows](const Json& j) {
    EvalRow row;
    row.gold = parse(j.at("gold").get<std::string>());
    row.pred = parse(j.at("pred").get<std::string>());
    row.latency_s = j.value("latency_s", 0.0);
    rows.push_back(std::move(row));
  });
  return rows;
}

// ---- report serialization ----------------------------------------------------------------------

inline Json eval_report_to_json(const EvalReport& report) {
  Json templates = Json::array();
  for (const auto& t : report.templates) {
    Json row{{"template", t.template_text},
             {"count", t.count},
             {"mean_ted", t.mean_ted},
             {"exact_match_rate", t.exact_match_rate}};
    if (t.execution_match_rate) row["execution_match_rate"] = *t.execution_match_rate;
    templates.push_back(std::move(row));
  }
  auto averages = [](const Averages& a) {
    Json j{{"mean_ted", a.mean_ted}, {"exact_match_rate", a.exact_match_rate}};
    if (a.execution_match_rate) j["execution_match_rate"] = *a.execution_match_rate;
    return j;
  };
  return Json{{"templates", templates},
              {"micro", averages(report.micro)},
              {"macro", averages(report.macro)},
              {"latency", Json{{"p50", report.latency_p50},
                               {"p90", report.latency_p90},
                               {"p99", report.latency_p99}}}};
}

inline EvalReport eval_report_from_json(const Json& j) {
  EvalReport report;
  for (const auto& t : j.at("templates")) {
    TemplateStats stats;
    stats.template_text = t.at("template").get<std::string>();
    stats.count = t.at("count").get<std::size_t>();
    stats.mean_ted = t.at("mean_ted").get<double>();
    stats.exact_match_rate = t.at("exact_match_rate").get<double>();
    if (t.contains("execution_match_rate")) {
      stats.execution_match_rate = t["execution_match_rate"].get<double>();
    }
    report.templates.push_back(std::move(stats));
  }
  report.micro.mean_ted = j.at("micro").at("mean_ted").get<double>();
  report.micro.exact_match_rate = j.at("micro").at("exact_match_rate").get<double>();
  report.macro.mean_ted = j.at("macro").at("mean_ted").get<double>();
  report.macro.exact_match_rate = j.at("macro").at("exact_match_rate").get<double>();
  report.latency_p50 = j.at("latency").at("p50").get<double>();
  report.latency_p90 = j.at("latency").at("p90").get<double>();
  report.latency_p99 = j.at("latency").at("p99").get<double>();
  return report;
}

inline Json ab_report_to_json(const AbReport& report) {
  auto metrics = [](const VariantMetrics& m) {
    return Json{{"adoption", m.adoption},
                {"engagement", m.engagement},
                {"failure", m.failure},
                {"latency_median", m.latency_median},
                {"latency_p99", m.latency_p99}};
  };
  Json ratios = Json::object();
  auto put_ratio = [&ratios](const char* key, const std::optional<MetricRatio>& r) {
    if (r) ratios[key] = Json{{"value", r->value}, {"rendered", r->rendered}};
  };
  put_ratio("adoption", report.adoption_ratio);
  put_ratio("engagement", report.engagement_ratio);
  put_ratio("failure", report.failure_ratio);
  put_ratio("latency_median", report.latency_median_ratio);
  put_ratio("latency_p99", report.latency_p99_ratio);
  return Json{{"control", Json{{"variant", report.control_variant}, {"metrics", metrics(report.control)}}},
              {"treatment", Json{{"variant", report.treatment_variant}, {"metrics", metrics(report.treatment)}}},
              {"ratios", ratios}};
}

inline Json violations_to_json(const std::vector<Violation>& violations) {
  Json out = Json::array();
  for (const auto& v : violations) {
    out.push_back({{"kind", violation_kind_name(v.kind)}, {"location", v.location}});
  }
  return out;
}

}  // namespace nl2sql
