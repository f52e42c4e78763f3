#pragma once

// Feedback loop: classify production interactions, distill edited
// interactions into retraining pairs, and pick the worst-performing
// templates for the next collection round.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/eval.hpp"
#include "nl2sql/parse.hpp"
#include "nl2sql/serialize.hpp"
#include "nl2sql/templates.hpp"

namespace nl2sql {

struct InteractionRecord {
  std::string nl;
  std::optional<DataModelSchema> schema;
  std::string predicted_sql;
  std::string final_sql;
  bool edited = false;
  bool deleted = false;
  std::int64_t timestamp = 0;  // epoch seconds
  std::string user_id;
};

// UneditedKept covers the paper's cases 1 and 4, which are indistinguishable
// without a gold label and are excluded from retraining either way.
enum class InteractionCase { UneditedKept, EditedAccepted, EditedRejected, Deleted };

inline const char* interaction_case_name(InteractionCase c) {
  switch (c) {
    case InteractionCase::UneditedKept: return "UneditedKept";
    case InteractionCase::EditedAccepted: return "EditedAccepted";
    case InteractionCase::EditedRejected: return "EditedRejected";
    case InteractionCase::Deleted: return "Deleted";
  }
  return "?";
}

inline InteractionCase classify_interaction(const InteractionRecord& rec, double quality_score,
                                            double threshold) {
  if (rec.deleted) return InteractionCase::Deleted;
  if (!rec.edited) return InteractionCase::UneditedKept;
  return quality_score >= threshold ? InteractionCase::EditedAccepted
                                    : InteractionCase::EditedRejected;
}

// Pair-scoring contract: tree_eval's score or any external estimator.
using PairScorer = std::function<double(const std::string& nl, const std::string& sql)>;

struct TrainingPair {
  std::string nl;
  std::string sql;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// For each NL, scores every edited final-SQL version, keeps the argmax
// (latest timestamp on ties), and drops it when it scores below the
// threshold. Output is sorted by (template of the SQL, timestamp).
inline std::vector<TrainingPair> build_training_set(const std::vector<InteractionRecord>& records,
                                                    const PairScorer& scorer, double threshold) {
  struct Version {
    const InteractionRecord* rec;
    double score;
  };
  std::map<std::string, Version> best_by_nl;
  for (const auto& rec : records) {
    if (rec.deleted || !rec.edited) continue;
    double score = scorer(rec.nl, rec.final_sql);
    auto it = best_by_nl.find(rec.nl);
    if (it == best_by_nl.end()) {
      best_by_nl.emplace(rec.nl, Version{&rec, score});
      continue;
    }
    if (score > it->second.score ||
        (score == it->second.score && rec.timestamp > it->second.rec->timestamp)) {
      it->second = Version{&rec, score};
    }
  }

  struct Emitted {
    std::string template_text;
    std::int64_t timestamp;
    TrainingPair pair;
  };
  std::vector<Emitted> emitted;
  for (const auto& [nl, version] : best_by_nl) {
    if (version.score < threshold) continue;
    Emitted e;
    e.template_text = extract_template(parse(version.rec->final_sql)).text;
    e.timestamp = version.rec->timestamp;
    e.pair = TrainingPair{nl, version.rec->final_sql};
    emitted.push_back(std::move(e));
  }
  std::sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
    if (a.template_text != b.template_text) return a.template_text < b.template_text;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.pair.nl < b.pair.nl;
  });
  std::vector<TrainingPair> out;
  out.reserve(emitted.size());
  for (auto& e : emitted) out.push_back(std::move(e.pair));
  return out;
}

// The k templates with the highest mean TED; ties break by lower exact-match
// rate, then template text. k larger than the report clips.
inline std::vector<Template> select_worst_templates(const EvalReport& report, std::size_t k) {
  if (report.templates.empty()) throw EmptyInputError("report has no templates");
  std::vector<const TemplateStats*> order;
  for (const auto& stats : report.templates) order.push_back(&stats);
  std::sort(order.begin(), order.end(), [](const TemplateStats* a, const TemplateStats* b) {
    if (a->mean_ted != b->mean_ted) return a->mean_ted > b->mean_ted;
    if (a->exact_match_rate != b->exact_match_rate) return a->exact_match_rate < b->exact_match_rate;
    return a->template_text < b->template_text;
  });
  if (k > order.size()) k = order.size();
  std::vector<Template> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(Template{order[i]->template_text, stable_hash_hex(order[i]->template_text)});
  }
  return out;
}

}  // namespace nl2sql
