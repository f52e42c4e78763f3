// nl2sql command-line tool: every library module over files.
//
// Results go to stdout as JSON (JSONL for sampled/built corpora); domain
// errors print one machine-readable JSON line to stderr and exit 1; usage
// errors exit 2. NL2SQL_FORGE_LOG={error,info,debug} controls diagnostics.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nl2sql/nl2sql.hpp"

namespace {

using nl2sql::Json;

int log_level() {
  const char* env = std::getenv("NL2SQL_FORGE_LOG");
  if (env == nullptr) return 0;
  std::string v = env;
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "[info] " << message << "\n";
}

void emit(const Json& result, const std::string& out_path) {
  std::string text = result.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    nl2sql::write_file(out_path, text);
  }
}

void emit_lines(const std::vector<Json>& lines, const std::string& out_path) {
  std::string text;
  for (const auto& line : lines) text += line.dump() + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    nl2sql::write_file(out_path, text);
  }
}

std::string sql_from(const std::string& inline_sql, const std::string& file) {
  if (!inline_sql.empty()) return inline_sql;
  if (file.empty()) throw nl2sql::Error("InvalidArgument", "provide --sql or --sql-file");
  std::string text = nl2sql::read_file(file);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

nl2sql::Database database_from_options(const std::string& db_path,
                                       const std::vector<std::string>& csv_specs) {
  nl2sql::Database db;
  if (!db_path.empty()) db = nl2sql::load_database(db_path);
  for (const auto& spec : csv_specs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw nl2sql::Error("InvalidArgument", "--csv expects table=path, got '" + spec + "'");
    }
    nl2sql::load_csv_table(db, spec.substr(0, eq), nl2sql::read_file(spec.substr(eq + 1)));
  }
  if (db.relations.empty()) {
    throw nl2sql::Error("InvalidArgument", "no database given: use --db and/or --csv");
  }
  return db;
}

// Share of SQL terminals (identifiers and literals) present in the NL; a
// trivial built-in pair scorer for `feedback build`.
double overlap_score(const std::string& nl, const std::string& sql) {
  nl2sql::SqlAst ast = nl2sql::parse(sql);
  nl2sql::FeatureOptions opts;
  opts.terminals_include_identifiers = true;
  auto terms = nl2sql::detail::sql_terminals(ast, true);
  if (terms.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& term : terms) {
    if (nl2sql::detail::contains_ci(nl, term)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(terms.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar-constrained SQL generation and evaluation toolkit"};
  app.require_subcommand(1);

  // ---- parse ----
  std::string p_sql, p_sql_file, p_schema;
  auto* cmd_parse = app.add_subcommand("parse", "Parse SQL and print the canonical form");
  cmd_parse->add_option("--sql", p_sql, "SQL text");
  cmd_parse->add_option("--sql-file", p_sql_file, "File containing SQL text");
  cmd_parse->add_option("--schema", p_schema, "Schema JSON; adds violation checking");

  // ---- mask ----
  std::string m_schema, m_vocab, m_prefix;
  auto* cmd_mask = app.add_subcommand("mask", "Token admissibility for a decoding prefix");
  cmd_mask->add_option("--schema", m_schema, "Schema JSON")->required();
  cmd_mask->add_option("--vocab", m_vocab, "Vocabulary JSON")->required();
  cmd_mask->add_option("--prefix", m_prefix, "Generation prefix (may be empty)");

  // ---- decode ----
  std::string d_schema, d_vocab, d_nl, d_scorer = "uniform", d_corpus, d_out;
  int d_beam = 4, d_max_tokens = 48;
  int d_seed = 0;
  bool d_normalize = false;
  auto* cmd_decode = app.add_subcommand("decode", "Beam-search SQL under the grammar mask");
  cmd_decode->add_option("--schema", d_schema, "Schema JSON")->required();
  cmd_decode->add_option("--vocab", d_vocab, "Vocabulary JSON")->required();
  cmd_decode->add_option("--nl", d_nl, "Natural-language question")->required();
  cmd_decode->add_option("--scorer", d_scorer, "uniform | ngram");
  cmd_decode->add_option("--train-corpus", d_corpus, "Corpus JSONL for the ngram scorer");
  cmd_decode->add_option("--beam", d_beam, "Beam size");
  cmd_decode->add_option("--max-tokens", d_max_tokens, "Token budget");
  cmd_decode->add_option("--seed", d_seed, "Unused by built-in scorers; kept for interface parity");
  cmd_decode->add_flag("--normalize", d_normalize, "Length-normalize final scores");
  cmd_decode->add_option("--out", d_out, "Write result JSON here instead of stdout");

  // ---- ted ----
  std::string t_gold, t_pred, t_costs;
  auto* cmd_ted = app.add_subcommand("ted", "Weighted tree edit distance between two SQL files");
  cmd_ted->add_option("--gold", t_gold, "File with the gold SQL")->required();
  cmd_ted->add_option("--pred", t_pred, "File with the predicted SQL")->required();
  cmd_ted->add_option("--costs", t_costs, "Cost config JSON");

  // ---- eval-report ----
  std::string e_rows, e_costs, e_db, e_out;
  auto* cmd_eval = app.add_subcommand("eval-report", "Per-template evaluation report");
  cmd_eval->add_option("--rows", e_rows, "JSONL of {gold, pred, latency_s}")->required();
  cmd_eval->add_option("--costs", e_costs, "Cost config JSON");
  cmd_eval->add_option("--db", e_db, "Database JSON; adds execution match");
  cmd_eval->add_option("--out", e_out, "Write report JSON here instead of stdout");

  // ---- exec ----
  std::string x_sql, x_sql_file, x_db;
  std::vector<std::string> x_csv;
  auto* cmd_exec = app.add_subcommand("exec", "Execute SQL against a database");
  cmd_exec->add_option("--sql", x_sql, "SQL text");
  cmd_exec->add_option("--sql-file", x_sql_file, "File containing SQL text");
  cmd_exec->add_option("--db", x_db, "Database JSON");
  cmd_exec->add_option("--csv", x_csv, "table=path CSV ingestion (repeatable)");

  // ---- template ----
  auto* cmd_template = app.add_subcommand("template", "Template extraction and sampling");
  cmd_template->require_subcommand(1);
  std::string te_sql, te_sql_file;
  auto* cmd_t_extract = cmd_template->add_subcommand("extract", "Template of one query");
  cmd_t_extract->add_option("--sql", te_sql, "SQL text");
  cmd_t_extract->add_option("--sql-file", te_sql_file, "File containing SQL text");
  std::string td_corpus, td_out;
  auto* cmd_t_dist = cmd_template->add_subcommand("dist", "Template distribution of a corpus");
  cmd_t_dist->add_option("--corpus", td_corpus, "Corpus JSONL")->required();
  cmd_t_dist->add_option("--out", td_out, "Write JSON here instead of stdout");
  std::string ts_corpus, ts_out;
  int ts_n = 0, ts_seed = 0;
  auto* cmd_t_sample = cmd_template->add_subcommand("sample", "Distribution-proportional sample");
  cmd_t_sample->add_option("--corpus", ts_corpus, "Corpus JSONL")->required();
  cmd_t_sample->add_option("-n,--count", ts_n, "Sample size")->required();
  cmd_t_sample->add_option("--seed", ts_seed, "RNG seed");
  cmd_t_sample->add_option("--out", ts_out, "Write JSONL here instead of stdout");

  // ---- qe ----
  auto* cmd_qe = app.add_subcommand("qe", "Quality estimation");
  cmd_qe->require_subcommand(1);
  std::string qf_nl, qf_sql, qf_lexicons;
  double qf_work_time = 0.0;
  bool qf_identifiers = false;
  auto* cmd_qe_features = cmd_qe->add_subcommand("features", "Extract the eight features");
  cmd_qe_features->add_option("--nl", qf_nl, "Natural-language text")->required();
  cmd_qe_features->add_option("--sql", qf_sql, "SQL text")->required();
  cmd_qe_features->add_option("--work-time", qf_work_time, "Worker time in seconds");
  cmd_qe_features->add_option("--lexicons", qf_lexicons, "Lexicon JSON");
  cmd_qe_features->add_flag("--terminals-include-identifiers", qf_identifiers,
                            "Check identifiers, not just literals, against the NL");
  std::string qs_pairs, qs_tree, qs_lexicons, qs_out;
  double qs_threshold = 0.5;
  auto* cmd_qe_score = cmd_qe->add_subcommand("score", "Score and filter labeled pairs");
  cmd_qe_score->add_option("--pairs", qs_pairs, "Pairs JSONL")->required();
  cmd_qe_score->add_option("--tree", qs_tree, "Decision tree JSON")->required();
  cmd_qe_score->add_option("--threshold", qs_threshold, "Acceptance threshold");
  cmd_qe_score->add_option("--lexicons", qs_lexicons, "Lexicon JSON");
  cmd_qe_score->add_option("--out", qs_out, "Write JSON here instead of stdout");
  std::string qt_pairs, qt_lexicons, qt_out;
  int qt_max_depth = 3, qt_min_leaf = 1;
  auto* cmd_qe_train = cmd_qe->add_subcommand("train", "Train the decision-tree classifier");
  cmd_qe_train->add_option("--pairs", qt_pairs, "Labeled pairs JSONL")->required();
  cmd_qe_train->add_option("--max-depth", qt_max_depth, "Maximum depth");
  cmd_qe_train->add_option("--min-leaf", qt_min_leaf, "Minimum rows per leaf");
  cmd_qe_train->add_option("--lexicons", qt_lexicons, "Lexicon JSON");
  cmd_qe_train->add_option("--out", qt_out, "Write tree JSON here instead of stdout");

  // ---- feedback ----
  auto* cmd_feedback = app.add_subcommand("feedback", "Feedback-loop data curation");
  cmd_feedback->require_subcommand(1);
  std::string fb_records, fb_scorer = "overlap", fb_tree, fb_lexicons, fb_out;
  double fb_threshold = 0.5;
  auto* cmd_fb_build = cmd_feedback->add_subcommand("build", "Build a retraining set from records");
  cmd_fb_build->add_option("--records", fb_records, "Interaction records JSONL")->required();
  cmd_fb_build->add_option("--scorer", fb_scorer, "overlap | tree");
  cmd_fb_build->add_option("--tree", fb_tree, "Decision tree JSON (for --scorer tree)");
  cmd_fb_build->add_option("--lexicons", fb_lexicons, "Lexicon JSON (for --scorer tree)");
  cmd_fb_build->add_option("--threshold", fb_threshold, "Score threshold");
  cmd_fb_build->add_option("--out", fb_out, "Write JSONL here instead of stdout");
  std::string fw_report, fw_out;
  int fw_k = 1;
  auto* cmd_fb_worst = cmd_feedback->add_subcommand("worst", "Worst-performing templates");
  cmd_fb_worst->add_option("--report", fw_report, "Eval report JSON")->required();
  cmd_fb_worst->add_option("-k,--top", fw_k, "How many templates");
  cmd_fb_worst->add_option("--out", fw_out, "Write JSON here instead of stdout");

  // ---- metrics ----
  auto* cmd_metrics = app.add_subcommand("metrics", "Online A/B metrics over event logs");
  cmd_metrics->require_subcommand(1);
  std::string mr_events, mr_variant, mr_end;
  auto* cmd_m_rates = cmd_metrics->add_subcommand("rates", "Adoption, engagement, failures, latency");
  cmd_m_rates->add_option("--events", mr_events, "Events JSONL")->required();
  cmd_m_rates->add_option("--variant", mr_variant, "Experiment arm")->required();
  cmd_m_rates->add_option("--window-end", mr_end, "ISO-8601 instant or epoch seconds")->required();
  std::string ma_events, ma_control, ma_treatment, ma_end, ma_out;
  auto* cmd_m_ab = cmd_metrics->add_subcommand("ab-report", "Treatment vs control comparison");
  cmd_m_ab->add_option("--events", ma_events, "Events JSONL")->required();
  cmd_m_ab->add_option("--control", ma_control, "Control arm")->required();
  cmd_m_ab->add_option("--treatment", ma_treatment, "Treatment arm")->required();
  cmd_m_ab->add_option("--window-end", ma_end, "ISO-8601 instant or epoch seconds")->required();
  cmd_m_ab->add_option("--out", ma_out, "Write JSON here instead of stdout");

  // ---- grammar ----
  auto* cmd_grammar = app.add_subcommand("grammar", "Grammar utilities");
  cmd_grammar->require_subcommand(1);
  auto* cmd_g_print = cmd_grammar->add_subcommand("print", "Print the grammar as EBNF");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_parse->parsed()) {
      std::string text = sql_from(p_sql, p_sql_file);
      nl2sql::SqlAst ast = nl2sql::parse(text);
      Json out{{"canonical", nl2sql::serialize(ast)}};
      if (!p_schema.empty()) {
        auto violations = nl2sql::validate_against_schema(ast, nl2sql::load_schema(p_schema));
        out["violations"] = nl2sql::violations_to_json(violations);
      }
      emit(out, "");
    } else if (cmd_mask->parsed()) {
      auto schema = nl2sql::compile_schema(nl2sql::load_schema(m_schema));
      nl2sql::Vocabulary vocab = nl2sql::load_vocabulary(m_vocab);
      nl2sql::ParserState state = nl2sql::init_state(schema).advance(m_prefix);
      const char* viability = state.viability() == nl2sql::Viability::Complete ? "Complete"
                              : state.viability() == nl2sql::Viability::Dead   ? "Dead"
                                                                               : "Viable";
      Json out{{"viability", viability}};
      if (state.viability() != nl2sql::Viability::Dead) {
        nl2sql::TokenMask mask = nl2sql::valid_mask(state, vocab);
        Json allowed = Json::array();
        for (std::size_t i = 0; i < mask.allowed.size(); ++i) {
          if (mask.allowed[i]) allowed.push_back(i);
        }
        out["allowed"] = allowed;
      }
      emit(out, "");
    } else if (cmd_decode->parsed()) {
      nl2sql::DataModelSchema schema = nl2sql::load_schema(d_schema);
      nl2sql::Vocabulary vocab = nl2sql::load_vocabulary(d_vocab);
      nl2sql::ScorerFn scorer;
      if (d_scorer == "uniform") {
        scorer = nl2sql::uniform_scorer(vocab.tokens.size());
      } else if (d_scorer == "ngram") {
        if (d_corpus.empty()) {
          throw nl2sql::Error("InvalidArgument", "--scorer ngram requires --train-corpus");
        }
        std::vector<std::string> texts;
        for (const auto& ast : nl2sql::load_corpus(d_corpus)) {
          texts.push_back(nl2sql::serialize(ast));
        }
        scorer = nl2sql::CharTrigramScorer(vocab, texts);
      } else {
        throw nl2sql::Error("InvalidArgument", "unknown scorer '" + d_scorer + "'");
      }
      std::string input = nl2sql::encode_scorer_input(d_nl, schema);
      log_info("decoding with input encoding: " + input);
      auto hyps = nl2sql::beam_decode(input, nl2sql::compile_schema(schema), scorer, vocab,
                                      d_beam, d_max_tokens, d_normalize);
      Json candidates = Json::array();
      for (const auto& hyp : hyps) {
        candidates.push_back({{"sql", hyp.text}, {"log_score", hyp.log_score}});
      }
      emit(Json{{"input_encoding", input}, {"candidates", candidates}}, d_out);
    } else if (cmd_ted->parsed()) {
      nl2sql::CostConfig costs;
      if (!t_costs.empty()) costs = nl2sql::load_cost_config(t_costs);
      nl2sql::SqlAst gold = nl2sql::parse(sql_from("", t_gold));
      nl2sql::SqlAst pred = nl2sql::parse(sql_from("", t_pred));
      emit(Json{{"ted", nl2sql::ted(gold, pred, costs)}}, "");
    } else if (cmd_eval->parsed()) {
      nl2sql::CostConfig costs;
      if (!e_costs.empty()) costs = nl2sql::load_cost_config(e_costs);
      auto rows = nl2sql::load_eval_rows(e_rows);
      std::optional<nl2sql::Database> db;
      if (!e_db.empty()) db = nl2sql::load_database(e_db);
      nl2sql::EvalReport report =
          nl2sql::aggregate_report(rows, costs, db ? &*db : nullptr);
      emit(nl2sql::eval_report_to_json(report), e_out);
    } else if (cmd_exec->parsed()) {
      nl2sql::Database db = database_from_options(x_db, x_csv);
      nl2sql::SqlAst ast = nl2sql::parse(sql_from(x_sql, x_sql_file));
      emit(nl2sql::relation_to_json(nl2sql::execute(ast, db)), "");
    } else if (cmd_t_extract->parsed()) {
      nl2sql::Template t = nl2sql::extract_template(nl2sql::parse(sql_from(te_sql, te_sql_file)));
      emit(Json{{"template", t.text}, {"hash", t.structural_hash}}, "");
    } else if (cmd_t_dist->parsed()) {
      auto dist = nl2sql::template_distribution(nl2sql::load_corpus(td_corpus));
      Json out = Json::object();
      for (const auto& [text, entry] : dist.entries) {
        out[text] = Json{{"count", entry.count}, {"frequency", entry.frequency}};
      }
      emit(out, td_out);
    } else if (cmd_t_sample->parsed()) {
      if (ts_n <= 0) throw nl2sql::Error("InvalidArgument", "sample size must be positive");
      auto sample = nl2sql::sample_by_distribution(nl2sql::load_corpus(ts_corpus),
                                                   static_cast<std::size_t>(ts_n), ts_seed);
      std::vector<Json> lines;
      for (const auto& ast : sample) lines.push_back(Json{{"sql", nl2sql::serialize(ast)}});
      emit_lines(lines, ts_out);
    } else if (cmd_qe_features->parsed()) {
      nl2sql::Lexicons lex = qf_lexicons.empty() ? nl2sql::Lexicons::defaults()
                                                 : nl2sql::load_lexicons(qf_lexicons);
      nl2sql::FeatureOptions opts;
      opts.terminals_include_identifiers = qf_identifiers;
      nl2sql::FeatureVector fv = nl2sql::extract_features(qf_nl, qf_sql, qf_work_time, lex, opts);
      emit(Json{{"work_time_s", fv.work_time_s},
                {"has_more_than_two_words", fv.has_more_than_two_words},
                {"terminals_in_nl", fv.terminals_in_nl},
                {"sql_complexity", nl2sql::hardness_name(fv.sql_complexity)},
                {"sql_complexity_code", static_cast<int>(fv.sql_complexity)},
                {"time_per_complexity", fv.time_per_complexity},
                {"levenshtein_nl_sql", fv.levenshtein_nl_sql},
                {"order_by_direction_match", fv.order_by_direction_match},
                {"limit_words_present", fv.limit_words_present}},
           "");
    } else if (cmd_qe_score->parsed()) {
      nl2sql::Lexicons lex = qs_lexicons.empty() ? nl2sql::Lexicons::defaults()
                                                 : nl2sql::load_lexicons(qs_lexicons);
      nl2sql::DecisionTree tree = nl2sql::load_tree(qs_tree);
      std::vector<nl2sql::ScoredPair> pairs;
      for (const auto& p : nl2sql::load_labeled_pairs(qs_pairs)) {
        pairs.push_back({p.nl, p.sql, p.work_time_s, 0.0});
      }
      nl2sql::FilterResult result = nl2sql::filter_pairs(pairs, tree, qs_threshold, lex);
      auto to_json = [](const std::vector<nl2sql::ScoredPair>& list) {
        Json arr = Json::array();
        for (const auto& p : list) {
          arr.push_back({{"nl", p.nl}, {"sql", p.sql}, {"score", p.score}});
        }
        return arr;
      };
      emit(Json{{"accepted", to_json(result.accepted)}, {"flagged", to_json(result.flagged)}},
           qs_out);
    } else if (cmd_qe_train->parsed()) {
      nl2sql::Lexicons lex = qt_lexicons.empty() ? nl2sql::Lexicons::defaults()
                                                 : nl2sql::load_lexicons(qt_lexicons);
      std::vector<nl2sql::LabeledFeatures> data;
      for (const auto& p : nl2sql::load_labeled_pairs(qt_pairs)) {
        data.push_back({nl2sql::extract_features(p.nl, p.sql, p.work_time_s, lex), p.label});
      }
      nl2sql::DecisionTree tree = nl2sql::tree_train(data, static_cast<std::size_t>(qt_max_depth),
                                                     static_cast<std::size_t>(qt_min_leaf));
      emit(nl2sql::tree_to_json(tree), qt_out);
    } else if (cmd_fb_build->parsed()) {
      auto records = nl2sql::load_interaction_records(fb_records);
      nl2sql::PairScorer scorer;
      if (fb_scorer == "overlap") {
        scorer = overlap_score;
      } else if (fb_scorer == "tree") {
        if (fb_tree.empty()) {
          throw nl2sql::Error("InvalidArgument", "--scorer tree requires --tree");
        }
        nl2sql::DecisionTree tree = nl2sql::load_tree(fb_tree);
        nl2sql::Lexicons lex = fb_lexicons.empty() ? nl2sql::Lexicons::defaults()
                                                   : nl2sql::load_lexicons(fb_lexicons);
        scorer = [tree, lex](const std::string& nl, const std::string& sql) {
          // production interactions carry no worker time; zero is documented
          nl2sql::FeatureVector fv = nl2sql::extract_features(nl, sql, 0.0, lex);
          return nl2sql::tree_eval(tree, fv).second;
        };
      } else {
        throw nl2sql::Error("InvalidArgument", "unknown scorer '" + fb_scorer + "'");
      }
      auto pairs = nl2sql::build_training_set(records, scorer, fb_threshold);
      std::vector<Json> lines;
      for (const auto& pair : pairs) lines.push_back(Json{{"nl", pair.nl}, {"sql", pair.sql}});
      emit_lines(lines, fb_out);
    } else if (cmd_fb_worst->parsed()) {
      nl2sql::EvalReport report = nl2sql::eval_report_from_json(
          nl2sql::parse_json(nl2sql::read_file(fw_report), "report '" + fw_report + "'"));
      auto worst = nl2sql::select_worst_templates(report, static_cast<std::size_t>(fw_k));
      Json arr = Json::array();
      for (const auto& t : worst) arr.push_back({{"template", t.text}, {"hash", t.structural_hash}});
      emit(Json{{"templates", arr}}, fw_out);
    } else if (cmd_m_rates->parsed()) {
      auto events = nl2sql::load_events(mr_events);
      std::int64_t end = nl2sql::parse_instant(mr_end);
      Json out{{"adoption", nl2sql::adoption_rate(events, mr_variant, end)},
               {"engagement", nl2sql::engagement_rate(events, mr_variant, end)},
               {"failure", nl2sql::failure_rate(events, mr_variant, end)}};
      try {
        nl2sql::LatencyPercentiles lat = nl2sql::latency_percentiles(events, mr_variant, end);
        out["latency"] = Json{{"p50", lat.p50}, {"p90", lat.p90}, {"p99", lat.p99}};
      } catch (const nl2sql::NoSamplesError&) {
        out["latency"] = nullptr;
      }
      emit(out, "");
    } else if (cmd_m_ab->parsed()) {
      auto events = nl2sql::load_events(ma_events);
      nl2sql::AbReport report =
          nl2sql::ab_report(events, ma_control, ma_treatment, nl2sql::parse_instant(ma_end));
      emit(nl2sql::ab_report_to_json(report), ma_out);
    } else if (cmd_g_print->parsed()) {
      std::cout << nl2sql::grammar_ebnf();
    }
  } catch (const nl2sql::Error& e) {
    std::cerr << Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"kind", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
