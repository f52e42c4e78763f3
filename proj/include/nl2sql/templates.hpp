#pragma once

// SQL templates: canonical query text with tables, column refs and literals
// replaced by [TABLE]/[COL]/[VAL] placeholders, corpus distributions over
// templates, and distribution-proportional sampling via largest-remainder
// quotas.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/rng.hpp"
#include "nl2sql/serialize.hpp"

namespace nl2sql {

// Stable 64-bit FNV-1a, hex-encoded; std::hash is not stable across builds.
inline std::string stable_hash_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

struct Template {
  std::string text;
  std::string structural_hash;

  friend bool operator==(const Template& a, const Template& b) { return a.text == b.text; }
  friend bool operator<(const Template& a, const Template& b) { return a.text < b.text; }
};

// Keywords, operators, aggregate names, ASC/DESC and item counts are
// preserved; identifiers and literals (including the LIMIT value) become
// placeholders; * stays "*".
inline Template extract_template(const SqlAst& ast) {
  detail::SqlWriter writer;
  writer.template_mode = true;
  writer.query(ast);
  Template t;
  t.text = std::move(writer.out);
  t.structural_hash = stable_hash_hex(t.text);
  return t;
}

struct TemplateEntry {
  std::size_t count = 0;
  double frequency = 0.0;
};

struct TemplateDistribution {
  std::map<std::string, TemplateEntry> entries;  // template text -> entry
};

inline TemplateDistribution template_distribution(const std::vector<SqlAst>& corpus) {
  if (corpus.empty()) throw EmptyInputError("template distribution of an empty corpus");
  TemplateDistribution dist;
  for (const auto& ast : corpus) {
    dist.entries[extract_template(ast).text].count += 1;
  }
  const double total = static_cast<double>(corpus.size());
  for (auto& [text, entry] : dist.entries) {
    entry.frequency = static_cast<double>(entry.count) / total;
  }
  return dist;
}

// Largest-remainder apportionment of n over the template counts. Quotas sum
// to exactly n; remainder ties break by template text.
inline std::map<std::string, std::size_t> apportion_quotas(const TemplateDistribution& dist,
                                                           std::size_t n) {
  std::size_t total = 0;
  for (const auto& [text, entry] : dist.entries) total += entry.count;

  std::map<std::string, std::size_t> quotas;
  std::vector<std::pair<std::uint64_t, std::string>> remainders;  // (remainder, text)
  std::size_t assigned = 0;
  for (const auto& [text, entry] : dist.entries) {
    std::uint64_t numer = static_cast<std::uint64_t>(n) * entry.count;
    quotas[text] = static_cast<std::size_t>(numer / total);
    assigned += quotas[text];
    remainders.emplace_back(numer % total, text);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;  // largest remainder first
    return a.second < b.second;
  });
  std::size_t leftover = n - assigned;  // always < number of templates
  for (std::size_t i = 0; i < leftover; ++i) {
    quotas[remainders[i].second] += 1;
  }
  return quotas;
}

// Samples n queries whose template mix follows the corpus distribution.
// Within a template the draw is uniform without replacement, falling back to
// with-replacement when the quota exceeds that template's population.
inline std::vector<SqlAst> sample_by_distribution(const std::vector<SqlAst>& corpus, std::size_t n,
                                                  int seed) {
  if (corpus.empty()) throw EmptyInputError("cannot sample from an empty corpus");
  TemplateDistribution dist = template_distribution(corpus);

  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    members[extract_template(corpus[i]).text].push_back(i);
  }

  auto quotas = apportion_quotas(dist, n);
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::vector<SqlAst> out;
  out.reserve(n);
  for (const auto& [text, quota] : quotas) {  // template-text order: deterministic
    const auto& pop = members[text];
    if (quota <= pop.size()) {
      for (std::size_t idx : sample_indices(rng, pop.size(), quota)) {
        out.push_back(corpus[pop[idx]]);
      }
    } else {
      for (std::size_t i = 0; i < quota; ++i) {
        out.push_back(corpus[pop[bounded_uint(rng, static_cast<std::uint32_t>(pop.size()))]]);
      }
    }
  }
  return out;
}

}  // namespace nl2sql
