#pragma once

// Constrained decoding over the schema-contextualized SQL subset:
// character-incremental viable-prefix tracking, per-token vocabulary masks,
// beam search with a pluggable scorer, candidate re-ranking, and ranker
// training-set assembly.
//
// Viability is defined against the language of schema-valid queries, not the
// bare grammar: a state is Viable iff its consumed text is a prefix of some
// query that parses and passes validate_against_schema with zero violations,
// and Complete iff the consumed text is exactly such a query. Identifier
// continuations are therefore restricted to prefixes of in-scope schema
// names, and cross-clause constraints (a column referenced in the select
// list must be resolvable by tables that can still be joined) are tracked
// exactly via a small feasibility search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/exec.hpp"
#include "nl2sql/lexer.hpp"
#include "nl2sql/parse.hpp"
#include "nl2sql/rng.hpp"
#include "nl2sql/schema.hpp"
#include "nl2sql/serialize.hpp"

namespace nl2sql {

enum class Viability { Viable, Complete, Dead };

struct Vocabulary {
  std::vector<std::string> tokens;
  int eos_index = -1;
  std::optional<int> bos_index;

  // Indices in range; token strings nonempty except sentinels.
  void validate() const {
    if (eos_index < 0 || static_cast<std::size_t>(eos_index) >= tokens.size()) {
      throw Error("InvalidVocabulary", "eos index out of range");
    }
    if (bos_index && (*bos_index < 0 || static_cast<std::size_t>(*bos_index) >= tokens.size())) {
      throw Error("InvalidVocabulary", "bos index out of range");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      bool sentinel = static_cast<int>(i) == eos_index || (bos_index && static_cast<int>(i) == *bos_index);
      if (!sentinel && tokens[i].empty()) {
        throw Error("InvalidVocabulary", "token " + std::to_string(i) + " is empty");
      }
    }
  }
};

struct TokenMask {
  std::vector<bool> allowed;

  std::size_t count_allowed() const {
    return static_cast<std::size_t>(std::count(allowed.begin(), allowed.end(), true));
  }
};

class ParserState {
 public:
  using TableId = CompiledSchema::TableId;
  using ColId = CompiledSchema::ColId;

  ParserState() = default;

  explicit ParserState(SchemaPtr schema) : schema_(std::move(schema)) {
    status_ = compute_status();
  }

  const std::string& consumed_text() const { return consumed_; }
  Viability viability() const { return status_; }
  const SchemaPtr& schema() const { return schema_; }

  // Consumes `chunk` character by character. s.advance(a).advance(b) is
  // identical to s.advance(a + b). Throws DeadStateError when called on a
  // Dead state.
  ParserState advance(std::string_view chunk) const {
    if (status_ == Viability::Dead) throw DeadStateError();
    ParserState out = *this;
    for (char c : chunk) {
      out.step_char(c);
      if (out.dead_) break;
    }
    out.append_consumed(chunk);
    out.refresh_status();
    return out;
  }

  // -- internal driving (used by valid_mask) --------------------------------

  void step_char(char c) {
    if (!dead_) process_char(c);
  }
  void append_consumed(std::string_view chunk) { consumed_.append(chunk); }
  void refresh_status() { status_ = compute_status(); }
  bool dead() const { return dead_; }

 private:
  // Grammar positions. Everything from WhereLhs on is in the "frozen" region
  // where the FROM/JOIN table set can no longer grow.
  enum class Pos : std::uint8_t {
    Start,
    SelItem, SelIdentAfter, SelQualCol,
    SelAggLpar, SelAggArg, SelAggIdentAfter, SelAggQualCol, SelAggRpar,
    SelAfterItem,
    FromTable, AfterTable,
    JoinTable, JoinOnKw,
    JoinLhs, JoinLhsAfter, JoinLhsQualCol, JoinLhsDone,
    JoinRhs, JoinRhsAfter, JoinRhsQualCol,
    WhereLhs, WhereLhsAfter, WhereLhsQualCol,
    WhereOp, WhereRhs, WhereRhsAfter, WhereRhsQualCol, WhereDone,
    GroupByKw, GroupCol, GroupIdentAfter, GroupQualCol, GroupDone,
    OrderByKw, OrderItemPos, OrderIdentAfter, OrderQualCol,
    OrdAggLpar, OrdAggArg, OrdAggIdentAfter, OrdAggQualCol, OrdAggRpar,
    OrderDone, OrderAfterDir,
    LimitVal, Done,
  };

  enum class PendKind : std::uint8_t { None, Word, Number, StringLit, LtGt };

  struct TokenView {
    Token::Kind kind = Token::Kind::Eof;
    Keyword keyword = Keyword::Select;
    std::string lower;  // identifier text, lowercase
  };

  // ---- small sorted-set helpers ----
  template <typename T>
  static bool contains(const std::vector<T>& v, T x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  }
  template <typename T>
  static void insert_unique(std::vector<T>& v, T x) {
    if (!contains(v, x)) v.push_back(x);
  }

  bool in_frozen_region() const { return pos_ >= Pos::WhereLhs; }

  // ---- semantic bookkeeping --------------------------------------------

  bool note_unqual(const std::string& lower) {
    auto cid = schema_->find_column_id(lower);
    if (!cid) return false;
    insert_unique(unqual_, *cid);
    return true;
  }

  bool note_qualifier(const std::string& lower) {
    auto tid = schema_->find_table(lower);
    if (!tid) return false;
    qual_table_ = *tid;
    insert_unique(qual_, *tid);
    return true;
  }

  bool qual_col_ok(const std::string& lower) const {
    return schema_->column_index(qual_table_, lower).has_value();
  }

  bool add_scope_table(const std::string& lower) {
    auto tid = schema_->find_table(lower);
    if (!tid || contains(scope_, *tid)) return false;
    scope_.push_back(*tid);
    return true;
  }

  // Does a table set F with scope ⊆ F (F == scope when frozen) exist such
  // that every qualified table lands in F and every unqualified column name
  // resolves to exactly one table of F?
  bool feasible(bool frozen) const {
    if (frozen) {
      for (TableId q : qual_) {
        if (!contains(scope_, q)) return false;
      }
      for (ColId c : unqual_) {
        int n = 0;
        for (TableId t : scope_) {
          if (schema_->table_has_column(t, c)) ++n;
        }
        if (n != 1) return false;
      }
      return true;
    }
    std::vector<TableId> base = scope_;
    for (TableId q : qual_) insert_unique(base, q);
    std::vector<ColId> uncovered;
    std::vector<ColId> exact;
    for (ColId c : unqual_) {
      int n = 0;
      for (TableId t : base) {
        if (schema_->table_has_column(t, c)) ++n;
      }
      if (n >= 2) return false;
      if (n == 1) {
        exact.push_back(c);
      } else {
        uncovered.push_back(c);
      }
    }
    if (uncovered.empty()) return true;
    return cover_exists(base, uncovered, exact);
  }

  // Exact-cover search: extend `used` with tables so that each uncovered
  // column lands in exactly one table and no forbidden column reappears.
  bool cover_exists(const std::vector<TableId>& used, const std::vector<ColId>& uncovered,
                    const std::vector<ColId>& forbidden) const {
    if (uncovered.empty()) return true;
    ColId target = uncovered.front();
    for (TableId t : schema_->tables_with_column(target)) {
      if (contains(used, t)) continue;
      bool clash = false;
      for (ColId f : forbidden) {
        if (schema_->table_has_column(t, f)) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      std::vector<ColId> rest;
      std::vector<ColId> forbidden2 = forbidden;
      for (ColId u : uncovered) {
        if (schema_->table_has_column(t, u)) {
          forbidden2.push_back(u);
        } else {
          rest.push_back(u);
        }
      }
      std::vector<TableId> used2 = used;
      used2.push_back(t);
      if (cover_exists(used2, rest, forbidden2)) return true;
    }
    return false;
  }

  bool join_candidate_exists() const {
    for (TableId t = 0; t < schema_->table_count(); ++t) {
      if (contains(scope_, t)) continue;
      ParserState trial = *this;
      trial.scope_.push_back(t);
      if (trial.feasible(false)) return true;
    }
    return false;
  }

  // ---- token transitions -------------------------------------------------

  void die() { dead_ = true; }

  void feed_token(const TokenView& tok) {
    word_cands_.reset();
    const bool kw = tok.kind == Token::Kind::Keyword;
    switch (pos_) {
      case Pos::Start:
        if (kw && tok.keyword == Keyword::Select) {
          pos_ = Pos::SelItem;
        } else {
          die();
        }
        return;
      case Pos::SelItem:
        if (tok.kind == Token::Kind::Star) {
          pos_ = Pos::SelAfterItem;
        } else if (kw && keyword_agg(tok.keyword)) {
          agg_fn_ = *keyword_agg(tok.keyword);
          pos_ = Pos::SelAggLpar;
        } else if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::SelIdentAfter;
          if (!ident_could_continue(false)) die();
        } else {
          die();
        }
        return;
      case Pos::SelIdentAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(false)) return die();
          pos_ = Pos::SelQualCol;
        } else if (tok.kind == Token::Kind::Comma) {
          if (!note_unqual(held_) || !feasible(false)) return die();
          pos_ = Pos::SelItem;
        } else if (kw && tok.keyword == Keyword::From) {
          if (!note_unqual(held_) || !feasible(false)) return die();
          pos_ = Pos::FromTable;
        } else {
          die();
        }
        return;
      case Pos::SelQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::SelAfterItem;
        } else {
          die();
        }
        return;
      case Pos::SelAggLpar:
        if (tok.kind == Token::Kind::LParen) {
          pos_ = Pos::SelAggArg;
        } else {
          die();
        }
        return;
      case Pos::SelAggArg:
        if (tok.kind == Token::Kind::Star) {
          if (agg_fn_ != AggFunc::Count) return die();
          pos_ = Pos::SelAggRpar;
        } else if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::SelAggIdentAfter;
          if (!ident_could_continue(false)) die();
        } else {
          die();
        }
        return;
      case Pos::SelAggIdentAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(false)) return die();
          pos_ = Pos::SelAggQualCol;
        } else if (tok.kind == Token::Kind::RParen) {
          if (!note_unqual(held_) || !feasible(false)) return die();
          pos_ = Pos::SelAfterItem;
        } else {
          die();
        }
        return;
      case Pos::SelAggQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::SelAggRpar;
        } else {
          die();
        }
        return;
      case Pos::SelAggRpar:
        if (tok.kind == Token::Kind::RParen) {
          pos_ = Pos::SelAfterItem;
        } else {
          die();
        }
        return;
      case Pos::SelAfterItem:
        if (tok.kind == Token::Kind::Comma) {
          pos_ = Pos::SelItem;
        } else if (kw && tok.keyword == Keyword::From) {
          pos_ = Pos::FromTable;
        } else {
          die();
        }
        return;
      case Pos::FromTable:
        if (tok.kind == Token::Kind::Ident && add_scope_table(tok.lower) && feasible(false)) {
          pos_ = Pos::AfterTable;
        } else {
          die();
        }
        return;
      case Pos::AfterTable:
        clause_after_tables(tok);
        return;
      case Pos::JoinTable:
        if (tok.kind == Token::Kind::Ident && add_scope_table(tok.lower) && feasible(false)) {
          pos_ = Pos::JoinOnKw;
        } else {
          die();
        }
        return;
      case Pos::JoinOnKw:
        if (kw && tok.keyword == Keyword::On) {
          pos_ = Pos::JoinLhs;
        } else {
          die();
        }
        return;
      case Pos::JoinLhs:
        if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::JoinLhsAfter;
          if (!ident_could_continue(false)) die();
        } else {
          die();
        }
        return;
      case Pos::JoinLhsAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(false)) return die();
          pos_ = Pos::JoinLhsQualCol;
        } else if (tok.kind == Token::Kind::Eq) {
          if (!note_unqual(held_) || !feasible(false)) return die();
          pos_ = Pos::JoinRhs;
        } else {
          die();
        }
        return;
      case Pos::JoinLhsQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::JoinLhsDone;
        } else {
          die();
        }
        return;
      case Pos::JoinLhsDone:
        if (tok.kind == Token::Kind::Eq) {
          pos_ = Pos::JoinRhs;
        } else {
          die();
        }
        return;
      case Pos::JoinRhs:
        if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::JoinRhsAfter;
          if (!ident_could_continue(false)) die();
        } else {
          die();
        }
        return;
      case Pos::JoinRhsAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(false)) return die();
          pos_ = Pos::JoinRhsQualCol;
        } else {
          if (!note_unqual(held_)) return die();
          clause_after_tables(tok);
        }
        return;
      case Pos::JoinRhsQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::AfterTable;
        } else {
          die();
        }
        return;
      case Pos::WhereLhs:
        if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::WhereLhsAfter;
          if (!ident_could_continue(true)) die();
        } else {
          die();
        }
        return;
      case Pos::WhereLhsAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(true)) return die();
          pos_ = Pos::WhereLhsQualCol;
        } else if (is_compare_token(tok)) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::WhereRhs;
        } else {
          die();
        }
        return;
      case Pos::WhereLhsQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::WhereOp;
        } else {
          die();
        }
        return;
      case Pos::WhereOp:
        if (is_compare_token(tok)) {
          pos_ = Pos::WhereRhs;
        } else {
          die();
        }
        return;
      case Pos::WhereRhs:
        if (tok.kind == Token::Kind::Int || tok.kind == Token::Kind::Decimal ||
            tok.kind == Token::Kind::String ||
            (kw && (tok.keyword == Keyword::True_ || tok.keyword == Keyword::False_))) {
          pos_ = Pos::WhereDone;
        } else if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::WhereRhsAfter;
          if (!ident_could_continue(true)) die();
        } else {
          die();
        }
        return;
      case Pos::WhereRhsAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(true)) return die();
          pos_ = Pos::WhereRhsQualCol;
        } else {
          if (!note_unqual(held_) || !feasible(true)) return die();
          where_continuation(tok);
        }
        return;
      case Pos::WhereRhsQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::WhereDone;
        } else {
          die();
        }
        return;
      case Pos::WhereDone:
        where_continuation(tok);
        return;
      case Pos::GroupByKw:
        if (kw && tok.keyword == Keyword::By) {
          pos_ = Pos::GroupCol;
        } else {
          die();
        }
        return;
      case Pos::GroupCol:
        if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::GroupIdentAfter;
          if (!ident_could_continue(true)) die();
        } else {
          die();
        }
        return;
      case Pos::GroupIdentAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(true)) return die();
          pos_ = Pos::GroupQualCol;
        } else if (tok.kind == Token::Kind::Comma) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::GroupCol;
        } else if (kw && tok.keyword == Keyword::Order) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::OrderByKw;
        } else if (kw && tok.keyword == Keyword::Limit) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::LimitVal;
        } else {
          die();
        }
        return;
      case Pos::GroupQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::GroupDone;
        } else {
          die();
        }
        return;
      case Pos::GroupDone:
        if (tok.kind == Token::Kind::Comma) {
          pos_ = Pos::GroupCol;
        } else if (kw && tok.keyword == Keyword::Order) {
          pos_ = Pos::OrderByKw;
        } else if (kw && tok.keyword == Keyword::Limit) {
          pos_ = Pos::LimitVal;
        } else {
          die();
        }
        return;
      case Pos::OrderByKw:
        if (kw && tok.keyword == Keyword::By) {
          pos_ = Pos::OrderItemPos;
        } else {
          die();
        }
        return;
      case Pos::OrderItemPos:
        if (kw && keyword_agg(tok.keyword)) {
          agg_fn_ = *keyword_agg(tok.keyword);
          pos_ = Pos::OrdAggLpar;
        } else if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::OrderIdentAfter;
          if (!ident_could_continue(true)) die();
        } else {
          die();
        }
        return;
      case Pos::OrderIdentAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(true)) return die();
          pos_ = Pos::OrderQualCol;
        } else if (tok.kind == Token::Kind::Comma) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::OrderItemPos;
        } else if (kw && (tok.keyword == Keyword::Asc || tok.keyword == Keyword::Desc)) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::OrderAfterDir;
        } else if (kw && tok.keyword == Keyword::Limit) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::LimitVal;
        } else {
          die();
        }
        return;
      case Pos::OrderQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::OrderDone;
        } else {
          die();
        }
        return;
      case Pos::OrdAggLpar:
        if (tok.kind == Token::Kind::LParen) {
          pos_ = Pos::OrdAggArg;
        } else {
          die();
        }
        return;
      case Pos::OrdAggArg:
        if (tok.kind == Token::Kind::Star) {
          if (agg_fn_ != AggFunc::Count) return die();
          pos_ = Pos::OrdAggRpar;
        } else if (tok.kind == Token::Kind::Ident) {
          held_ = tok.lower;
          pos_ = Pos::OrdAggIdentAfter;
          if (!ident_could_continue(true)) die();
        } else {
          die();
        }
        return;
      case Pos::OrdAggIdentAfter:
        if (tok.kind == Token::Kind::Dot) {
          if (!note_qualifier(held_) || !feasible(true)) return die();
          pos_ = Pos::OrdAggQualCol;
        } else if (tok.kind == Token::Kind::RParen) {
          if (!note_unqual(held_) || !feasible(true)) return die();
          pos_ = Pos::OrderDone;
        } else {
          die();
        }
        return;
      case Pos::OrdAggQualCol:
        if (tok.kind == Token::Kind::Ident && qual_col_ok(tok.lower)) {
          pos_ = Pos::OrdAggRpar;
        } else {
          die();
        }
        return;
      case Pos::OrdAggRpar:
        if (tok.kind == Token::Kind::RParen) {
          pos_ = Pos::OrderDone;
        } else {
          die();
        }
        return;
      case Pos::OrderDone:
        if (tok.kind == Token::Kind::Comma) {
          pos_ = Pos::OrderItemPos;
        } else if (kw && (tok.keyword == Keyword::Asc || tok.keyword == Keyword::Desc)) {
          pos_ = Pos::OrderAfterDir;
        } else if (kw && tok.keyword == Keyword::Limit) {
          pos_ = Pos::LimitVal;
        } else {
          die();
        }
        return;
      case Pos::OrderAfterDir:
        if (tok.kind == Token::Kind::Comma) {
          pos_ = Pos::OrderItemPos;
        } else if (kw && tok.keyword == Keyword::Limit) {
          pos_ = Pos::LimitVal;
        } else {
          die();
        }
        return;
      case Pos::LimitVal:
        if (tok.kind == Token::Kind::Int) {
          pos_ = Pos::Done;
        } else {
          die();
        }
        return;
      case Pos::Done:
        die();
        return;
    }
    die();
  }

  // Transitions shared by AfterTable and the JoinRhsAfter flush: JOIN keeps
  // the scope open, WHERE/GROUP/ORDER/LIMIT freeze it.
  void clause_after_tables(const TokenView& tok) {
    if (tok.kind != Token::Kind::Keyword) return die();
    switch (tok.keyword) {
      case Keyword::Join:
        if (!feasible(false) || !join_candidate_exists()) return die();
        pos_ = Pos::JoinTable;
        return;
      case Keyword::Where:
        if (!feasible(true)) return die();
        pos_ = Pos::WhereLhs;
        return;
      case Keyword::Group:
        if (!feasible(true)) return die();
        pos_ = Pos::GroupByKw;
        return;
      case Keyword::Order:
        if (!feasible(true)) return die();
        pos_ = Pos::OrderByKw;
        return;
      case Keyword::Limit:
        if (!feasible(true)) return die();
        pos_ = Pos::LimitVal;
        return;
      default:
        die();
    }
  }

  void where_continuation(const TokenView& tok) {
    if (tok.kind != Token::Kind::Keyword) return die();
    switch (tok.keyword) {
      case Keyword::And:
      case Keyword::Or:
        pos_ = Pos::WhereLhs;
        return;
      case Keyword::Group:
        pos_ = Pos::GroupByKw;
        return;
      case Keyword::Order:
        pos_ = Pos::OrderByKw;
        return;
      case Keyword::Limit:
        pos_ = Pos::LimitVal;
        return;
      default:
        die();
    }
  }

  static std::optional<AggFunc> keyword_agg(Keyword k) {
    switch (k) {
      case Keyword::Count: return AggFunc::Count;
      case Keyword::Sum: return AggFunc::Sum;
      case Keyword::Avg: return AggFunc::Avg;
      case Keyword::Min: return AggFunc::Min;
      case Keyword::Max: return AggFunc::Max;
      default: return std::nullopt;
    }
  }

  static bool is_compare_token(const TokenView& tok) {
    switch (tok.kind) {
      case Token::Kind::Eq: case Token::Kind::Ne: case Token::Kind::Lt:
      case Token::Kind::Le: case Token::Kind::Gt: case Token::Kind::Ge:
        return true;
      case Token::Kind::Keyword:
        return tok.keyword == Keyword::Like;
      default:
        return false;
    }
  }

  // A held identifier at a dot-wait position must be usable either as a
  // qualifier (schema table) or as an unqualified column; otherwise the
  // state admits no continuation.
  bool ident_could_continue(bool frozen) const {
    {
      ParserState trial = *this;
      if (trial.note_qualifier(held_) && trial.feasible(frozen)) return true;
    }
    ParserState trial = *this;
    if (trial.note_unqual(held_) && trial.feasible(frozen)) return true;
    return false;
  }

  // ---- character machine --------------------------------------------------

  bool number_ok_here() const { return pos_ == Pos::WhereRhs || pos_ == Pos::LimitVal; }
  bool decimal_ok_here() const { return pos_ == Pos::WhereRhs; }
  bool string_ok_here() const { return pos_ == Pos::WhereRhs; }
  bool ltgt_ok_here() const { return pos_ == Pos::WhereOp || pos_ == Pos::WhereLhsAfter; }

  void process_char(char c) {
    for (;;) {
      switch (pend_kind_) {
        case PendKind::None: {
          if (is_space(c)) return;
          if (is_ident_start(c)) {
            pend_kind_ = PendKind::Word;
            pend_.assign(1, c);
            ensure_word_candidates();
            if (!word_prefix_alive()) die();
            return;
          }
          if (is_digit(c)) {
            if (!number_ok_here()) return die();
            pend_kind_ = PendKind::Number;
            pend_.assign(1, c);
            pend_has_dot_ = false;
            return;
          }
          if (c == '\'') {
            if (!string_ok_here()) return die();
            pend_kind_ = PendKind::StringLit;
            pend_.clear();
            str_saw_quote_ = false;
            return;
          }
          if (c == '<' || c == '>') {
            if (!ltgt_ok_here()) return die();
            pend_kind_ = PendKind::LtGt;
            pend_.assign(1, c);
            return;
          }
          TokenView tok;
          switch (c) {
            case ',': tok.kind = Token::Kind::Comma; break;
            case '.': tok.kind = Token::Kind::Dot; break;
            case '*': tok.kind = Token::Kind::Star; break;
            case '(': tok.kind = Token::Kind::LParen; break;
            case ')': tok.kind = Token::Kind::RParen; break;
            case '=': tok.kind = Token::Kind::Eq; break;
            default: return die();
          }
          feed_token(tok);
          return;
        }
        case PendKind::Word: {
          if (is_ident_char(c)) {
            pend_.push_back(c);
            if (!word_prefix_alive()) die();
            return;
          }
          close_word();
          if (dead_) return;
          continue;  // reprocess c as a fresh character
        }
        case PendKind::Number: {
          if (is_digit(c)) {
            pend_.push_back(c);
            return;
          }
          if (c == '.' && !pend_has_dot_) {
            if (!decimal_ok_here()) return die();
            pend_has_dot_ = true;
            pend_.push_back(c);
            return;
          }
          if (is_ident_start(c)) return die();  // "12abc" is not lexable
          close_number();
          if (dead_) return;
          continue;
        }
        case PendKind::StringLit: {
          if (str_saw_quote_) {
            if (c == '\'') {  // '' escape, stay inside the literal
              pend_.push_back('\'');
              str_saw_quote_ = false;
              return;
            }
            close_string();
            if (dead_) return;
            continue;
          }
          if (c == '\'') {
            str_saw_quote_ = true;
            return;
          }
          pend_.push_back(c);
          return;
        }
        case PendKind::LtGt: {
          char first = pend_[0];
          pend_kind_ = PendKind::None;
          pend_.clear();
          TokenView tok;
          if (first == '<' && c == '=') {
            tok.kind = Token::Kind::Le;
            feed_token(tok);
            return;
          }
          if (first == '<' && c == '>') {
            tok.kind = Token::Kind::Ne;
            feed_token(tok);
            return;
          }
          if (first == '>' && c == '=') {
            tok.kind = Token::Kind::Ge;
            feed_token(tok);
            return;
          }
          tok.kind = (first == '<') ? Token::Kind::Lt : Token::Kind::Gt;
          feed_token(tok);
          if (dead_) return;
          continue;
        }
      }
    }
  }

  void close_word() {
    std::string lower = to_lower(pend_);
    pend_kind_ = PendKind::None;
    pend_.clear();
    TokenView tok;
    if (auto it = keyword_table().find(lower); it != keyword_table().end()) {
      tok.kind = Token::Kind::Keyword;
      tok.keyword = it->second;
    } else if (unsupported_keyword_table().count(lower) > 0) {
      return die();
    } else {
      tok.kind = Token::Kind::Ident;
      tok.lower = std::move(lower);
    }
    feed_token(tok);
  }

  void close_number() {
    if (pend_.back() == '.') return die();  // decimal needs a digit after the dot
    TokenView tok;
    tok.kind = pend_has_dot_ ? Token::Kind::Decimal : Token::Kind::Int;
    pend_kind_ = PendKind::None;
    pend_.clear();
    feed_token(tok);
  }

  void close_string() {
    TokenView tok;
    tok.kind = Token::Kind::String;
    pend_kind_ = PendKind::None;
    pend_.clear();
    str_saw_quote_ = false;
    feed_token(tok);
  }

  // ---- word candidates -----------------------------------------------------

  void ensure_word_candidates() {
    if (word_cands_) return;
    word_cands_ = std::make_shared<const std::vector<std::string>>(compute_word_candidates());
  }

  bool word_prefix_alive() const {
    std::string lower = to_lower(pend_);
    for (const auto& cand : *word_cands_) {
      if (cand.size() >= lower.size() && cand.compare(0, lower.size(), lower) == 0) return true;
    }
    return false;
  }

  // Words (keywords and schema identifiers, lowercase) that could form the
  // next token at the current position. Filtered by one-token simulation, so
  // the list is exact with respect to feed_token.
  std::vector<std::string> compute_word_candidates() const {
    std::vector<std::string> raw;
    auto add_keywords = [&raw](std::initializer_list<const char*> words) {
      for (const char* w : words) raw.emplace_back(w);
    };
    auto add_idents = [this, &raw]() {
      for (std::size_t c = 0; c < schema_->distinct_column_count(); ++c) {
        raw.push_back(schema_->column_lower_name(static_cast<ColId>(c)));
      }
      for (std::size_t t = 0; t < schema_->table_count(); ++t) {
        raw.push_back(schema_->table(static_cast<TableId>(t)).lower);
      }
    };
    auto add_qual_cols = [this, &raw]() {
      for (const auto& name : schema_->table(qual_table_).column_lowers) raw.push_back(name);
    };
    auto add_tables = [this, &raw]() {
      for (std::size_t t = 0; t < schema_->table_count(); ++t) {
        raw.push_back(schema_->table(static_cast<TableId>(t)).lower);
      }
    };
    switch (pos_) {
      case Pos::Start: add_keywords({"select"}); break;
      case Pos::SelItem:
      case Pos::OrderItemPos:
        add_keywords({"count", "sum", "avg", "min", "max"});
        add_idents();
        break;
      case Pos::SelIdentAfter:
      case Pos::SelAfterItem:
        add_keywords({"from"});
        break;
      case Pos::SelQualCol:
      case Pos::SelAggQualCol:
      case Pos::JoinLhsQualCol:
      case Pos::JoinRhsQualCol:
      case Pos::WhereLhsQualCol:
      case Pos::WhereRhsQualCol:
      case Pos::GroupQualCol:
      case Pos::OrderQualCol:
      case Pos::OrdAggQualCol:
        add_qual_cols();
        break;
      case Pos::SelAggArg:
      case Pos::OrdAggArg:
      case Pos::JoinLhs:
      case Pos::JoinRhs:
      case Pos::WhereLhs:
      case Pos::GroupCol:
        add_idents();
        break;
      case Pos::FromTable:
      case Pos::JoinTable:
        add_tables();
        break;
      case Pos::AfterTable:
      case Pos::JoinRhsAfter:
        add_keywords({"join", "where", "group", "order", "limit"});
        break;
      case Pos::JoinOnKw: add_keywords({"on"}); break;
      case Pos::WhereLhsAfter:
      case Pos::WhereOp:
        add_keywords({"like"});
        break;
      case Pos::WhereRhs:
        add_keywords({"true", "false"});
        add_idents();
        break;
      case Pos::WhereRhsAfter:
      case Pos::WhereDone:
        add_keywords({"and", "or", "group", "order", "limit"});
        break;
      case Pos::GroupByKw:
      case Pos::OrderByKw:
        add_keywords({"by"});
        break;
      case Pos::GroupIdentAfter:
      case Pos::GroupDone:
        add_keywords({"order", "limit"});
        break;
      case Pos::OrderIdentAfter:
      case Pos::OrderDone:
        add_keywords({"asc", "desc", "limit"});
        break;
      case Pos::OrderAfterDir:
        add_keywords({"limit"});
        break;
      case Pos::SelAggLpar:
      case Pos::SelAggRpar:
      case Pos::SelAggIdentAfter:
      case Pos::JoinLhsAfter:
      case Pos::JoinLhsDone:
      case Pos::OrdAggLpar:
      case Pos::OrdAggRpar:
      case Pos::OrdAggIdentAfter:
      case Pos::LimitVal:
      case Pos::Done:
        break;
    }
    std::vector<std::string> out;
    for (const auto& word : raw) {
      ParserState trial = *this;
      trial.feed_word(word);
      if (!trial.dead_) insert_unique(out, word);
    }
    return out;
  }

  void feed_word(const std::string& lower) {
    TokenView tok;
    if (auto it = keyword_table().find(lower); it != keyword_table().end()) {
      tok.kind = Token::Kind::Keyword;
      tok.keyword = it->second;
    } else {
      tok.kind = Token::Kind::Ident;
      tok.lower = lower;
    }
    feed_token(tok);
  }

  // ---- status ---------------------------------------------------------------

  bool accepting_position(Pos p) const {
    switch (p) {
      case Pos::AfterTable:
      case Pos::WhereDone:
      case Pos::GroupDone:
      case Pos::OrderDone:
      case Pos::OrderAfterDir:
      case Pos::Done:
        return true;
      default:
        return false;
    }
  }

  Viability compute_status() const {
    if (dead_) return Viability::Dead;
    ParserState trial = *this;
    switch (trial.pend_kind_) {
      case PendKind::None:
        break;
      case PendKind::Word:
        trial.close_word();
        break;
      case PendKind::Number:
        trial.close_number();
        break;
      case PendKind::StringLit:
        if (!trial.str_saw_quote_) return Viability::Viable;  // unterminated
        trial.close_string();
        break;
      case PendKind::LtGt: {
        TokenView tok;
        tok.kind = (trial.pend_[0] == '<') ? Token::Kind::Lt : Token::Kind::Gt;
        trial.pend_kind_ = PendKind::None;
        trial.pend_.clear();
        trial.feed_token(tok);
        break;
      }
    }
    if (trial.dead_) return Viability::Viable;  // the text so far is a strict prefix
    // flush a held identifier at a clause end
    switch (trial.pos_) {
      case Pos::JoinRhsAfter:
        if (!trial.note_unqual(trial.held_)) return Viability::Viable;
        trial.pos_ = Pos::AfterTable;
        break;
      case Pos::WhereRhsAfter:
        if (!trial.note_unqual(trial.held_)) return Viability::Viable;
        trial.pos_ = Pos::WhereDone;
        break;
      case Pos::GroupIdentAfter:
        if (!trial.note_unqual(trial.held_)) return Viability::Viable;
        trial.pos_ = Pos::GroupDone;
        break;
      case Pos::OrderIdentAfter:
        if (!trial.note_unqual(trial.held_)) return Viability::Viable;
        trial.pos_ = Pos::OrderDone;
        break;
      default:
        break;
    }
    if (trial.accepting_position(trial.pos_) && trial.feasible(true)) return Viability::Complete;
    return Viability::Viable;
  }

  SchemaPtr schema_;
  std::string consumed_;
  Viability status_ = Viability::Viable;
  bool dead_ = false;

  Pos pos_ = Pos::Start;
  std::vector<TableId> scope_;  // FROM/JOIN tables in query order
  std::vector<TableId> qual_;   // tables referenced via qualification
  std::vector<ColId> unqual_;   // unqualified column names referenced
  std::string held_;            // identifier awaiting '.' / delimiter resolution
  TableId qual_table_ = 0;      // qualifier for the pending qualified column
  AggFunc agg_fn_ = AggFunc::Count;

  PendKind pend_kind_ = PendKind::None;
  std::string pend_;
  bool pend_has_dot_ = false;
  bool str_saw_quote_ = false;
  std::shared_ptr<const std::vector<std::string>> word_cands_;
};

inline ParserState init_state(SchemaPtr schema) { return ParserState(std::move(schema)); }

inline ParserState init_state(const DataModelSchema& schema) {
  return ParserState(compile_schema(schema));
}

// Free-function form of ParserState::advance. Prefer the member in C++ code:
// with a std::string chunk argument, unqualified calls to this overload can
// collide with std::advance through ADL.
inline ParserState advance(const ParserState& state, std::string_view chunk) {
  return state.advance(chunk);
}

// allowed[i] == true iff advance(state, tokens[i]) is not Dead; eos is
// allowed exactly when the state is Complete.
inline TokenMask valid_mask(const ParserState& state, const Vocabulary& vocab) {
  if (state.viability() == Viability::Dead) throw DeadStateError();
  vocab.validate();
  TokenMask mask;
  mask.allowed.assign(vocab.tokens.size(), false);
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    if (static_cast<int>(i) == vocab.eos_index) {
      mask.allowed[i] = state.viability() == Viability::Complete;
      continue;
    }
    if (vocab.bos_index && static_cast<int>(i) == *vocab.bos_index) continue;
    ParserState trial = state;
    for (char c : vocab.tokens[i]) {
      trial.step_char(c);
      if (trial.dead()) break;
    }
    mask.allowed[i] = !trial.dead();
  }
  return mask;
}

// ---- beam search -----------------------------------------------------------

struct Hypothesis {
  std::vector<int> token_indices;
  std::string text;
  double log_score = 0.0;
  ParserState state;
};

// Given (input encoding, partial token index list), returns one log-score
// per vocabulary token. Must be pure and return exactly |vocab| values.
using ScorerFn = std::function<std::vector<double>(const std::string&, const std::vector<int>&)>;

// Given (natural-language question, SQL text), returns a score; higher means
// better match.
using RankerFn = std::function<double(const std::string&, const std::string&)>;

// Scorer input encoding: "<question> | <table>(<col>,...); <table>(...)".
inline std::string encode_scorer_input(const std::string& question, const DataModelSchema& schema) {
  std::string out = question + " |";
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    out += (t == 0 ? " " : "; ");
    out += schema.tables[t].name + "(";
    for (std::size_t c = 0; c < schema.tables[t].columns.size(); ++c) {
      if (c > 0) out += ",";
      out += schema.tables[t].columns[c].name;
    }
    out += ")";
  }
  return out;
}

inline ScorerFn uniform_scorer(std::size_t vocab_size) {
  return [vocab_size](const std::string&, const std::vector<int>&) {
    return std::vector<double>(vocab_size, 0.0);
  };
}

// Character-trigram language model over a training corpus, with Laplace
// smoothing. Scores a token by the log-probability of its characters given
// the hypothesis text so far.
class CharTrigramScorer {
 public:
  CharTrigramScorer(const Vocabulary& vocab, const std::vector<std::string>& corpus)
      : vocab_(vocab) {
    for (const auto& line : corpus) {
      std::string padded = "\x02\x02" + line + "\x03";
      for (std::size_t i = 2; i < padded.size(); ++i) {
        counts_[context_key(padded[i - 2], padded[i - 1])][padded[i]] += 1;
        alphabet_.insert(padded[i]);
      }
    }
    if (alphabet_.empty()) alphabet_.insert('\x03');
  }

  std::vector<double> operator()(const std::string&, const std::vector<int>& prefix) const {
    std::string text = "\x02\x02";
    for (int idx : prefix) text += vocab_.tokens[idx];
    std::vector<double> scores(vocab_.tokens.size(), 0.0);
    for (std::size_t i = 0; i < vocab_.tokens.size(); ++i) {
      if (static_cast<int>(i) == vocab_.eos_index) {
        scores[i] = char_log_prob(text, '\x03');
        continue;
      }
      if (vocab_.bos_index && static_cast<int>(i) == *vocab_.bos_index) {
        scores[i] = -1e30;
        continue;
      }
      std::string extended = text;
      double total = 0.0;
      for (char c : vocab_.tokens[i]) {
        total += char_log_prob(extended, c);
        extended.push_back(c);
      }
      scores[i] = total;
    }
    return scores;
  }

 private:
  static std::uint32_t context_key(char a, char b) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(a)) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b));
  }

  double char_log_prob(const std::string& text, char next) const {
    char a = text[text.size() - 2];
    char b = text[text.size() - 1];
    double total = static_cast<double>(alphabet_.size());
    double count = 1.0;
    if (auto it = counts_.find(context_key(a, b)); it != counts_.end()) {
      for (const auto& [c, n] : it->second) total += static_cast<double>(n);
      if (auto jt = it->second.find(next); jt != it->second.end()) {
        count += static_cast<double>(jt->second);
      }
    }
    return std::log(count / total);
  }

  Vocabulary vocab_;
  std::unordered_map<std::uint32_t, std::unordered_map<char, std::int64_t>> counts_;
  std::set<char> alphabet_;
};

namespace detail {

// score desc, then token indices ascending lexicographically, then shorter.
inline bool hypothesis_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_score != b.log_score) return a.log_score > b.log_score;
  if (a.token_indices != b.token_indices) {
    return std::lexicographical_compare(a.token_indices.begin(), a.token_indices.end(),
                                        b.token_indices.begin(), b.token_indices.end());
  }
  return a.token_indices.size() < b.token_indices.size();
}

}  // namespace detail

// Returns up to beam_size finished hypotheses, best first. Every returned
// text parses and passes schema validation with zero violations, for any
// scorer. Finished hypotheses are collected whenever eos is admissible, so a
// late eos index never starves completion.
inline std::vector<Hypothesis> beam_decode(const std::string& input, SchemaPtr schema,
                                           const ScorerFn& scorer, const Vocabulary& vocab,
                                           int beam_size, int max_tokens,
                                           bool length_normalize = false) {
  if (beam_size < 1) throw Error("InvalidArgument", "beam_size must be >= 1");
  if (max_tokens < 1) throw Error("InvalidArgument", "max_tokens must be >= 1");
  vocab.validate();

  std::vector<Hypothesis> live;
  live.push_back(Hypothesis{{}, "", 0.0, init_state(schema)});
  std::vector<Hypothesis> finished;

  for (int step = 0; step < max_tokens; ++step) {
    std::vector<Hypothesis> expanded;
    bool any_token_allowed = false;
    for (const Hypothesis& hyp : live) {
      TokenMask mask = valid_mask(hyp.state, vocab);
      std::vector<double> scores = scorer(input, hyp.token_indices);
      if (scores.size() != vocab.tokens.size()) {
        throw Error("InvalidScorer", "scorer must return one score per vocabulary token");
      }
      for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        if (!mask.allowed[i]) continue;
        any_token_allowed = true;
        if (static_cast<int>(i) == vocab.eos_index) {
          Hypothesis done = hyp;
          done.log_score += scores[i];
          finished.push_back(std::move(done));
          continue;
        }
        Hypothesis next = hyp;
        next.token_indices.push_back(static_cast<int>(i));
        next.text += vocab.tokens[i];
        next.log_score += scores[i];
        next.state = hyp.state.advance(vocab.tokens[i]);
        expanded.push_back(std::move(next));
      }
    }
    if (!any_token_allowed && finished.empty()) {
      throw NoViableTokenError("no vocabulary token is admissible for any live hypothesis");
    }
    if (expanded.empty()) break;
    std::sort(expanded.begin(), expanded.end(), detail::hypothesis_before);
    if (static_cast<int>(expanded.size()) > beam_size) expanded.resize(beam_size);
    live = std::move(expanded);
  }

  if (finished.empty()) {
    throw MaxLengthExceededError("no hypothesis finished within max_tokens");
  }
  // dedupe by text, keeping the best-scoring copy
  std::sort(finished.begin(), finished.end(), detail::hypothesis_before);
  std::vector<Hypothesis> unique;
  for (auto& hyp : finished) {
    bool seen = false;
    for (const auto& kept : unique) {
      if (kept.text == hyp.text) {
        seen = true;
        break;
      }
    }
    if (!seen) unique.push_back(std::move(hyp));
  }
  if (length_normalize) {
    std::stable_sort(unique.begin(), unique.end(), [](const Hypothesis& a, const Hypothesis& b) {
      double na = a.token_indices.empty() ? a.log_score
                                          : a.log_score / static_cast<double>(a.token_indices.size());
      double nb = b.token_indices.empty() ? b.log_score
                                          : b.log_score / static_cast<double>(b.token_indices.size());
      return na > nb;
    });
  }
  if (static_cast<int>(unique.size()) > beam_size) unique.resize(beam_size);
  return unique;
}

// Stable sort by descending ranker score; candidate contents unchanged.
inline std::vector<Hypothesis> rerank(const std::string& nl, std::vector<Hypothesis> candidates,
                                      const RankerFn& ranker) {
  if (candidates.empty()) throw Error("InvalidArgument", "candidates must be nonempty");
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) scores[i] = ranker(nl, candidates[i].text);
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Hypothesis> out;
  out.reserve(candidates.size());
  for (std::size_t i : order) out.push_back(std::move(candidates[i]));
  return out;
}

struct RankerExample {
  std::string nl;
  std::string sql;
  bool label = false;

  friend bool operator==(const RankerExample&, const RankerExample&) = default;
};

// Training pairs for a candidate ranker: the first eleven distinct beam
// candidates plus two seeded random SQLs from the pool, thirteen in total
// (pool entries fill in when the beam is short). A pair is labeled true when
// it equals the gold query after canonical serialization, or, when a
// database is supplied, when it execution-matches the gold query.
inline std::vector<RankerExample> assemble_ranker_training(
    const std::string& nl, const SqlAst& gold, const std::vector<Hypothesis>& beam,
    const std::vector<SqlAst>& random_pool, const Database* db, int seed) {
  constexpr std::size_t kBeamSlots = 11;
  constexpr std::size_t kTotal = 13;

  const std::string gold_text = serialize(gold);
  std::vector<std::string> chosen;
  for (const Hypothesis& hyp : beam) {
    if (chosen.size() >= kBeamSlots) break;
    std::string canonical = serialize(parse(hyp.text));
    bool seen = false;
    for (const auto& prior : chosen) {
      if (prior == canonical) {
        seen = true;
        break;
      }
    }
    if (!seen) chosen.push_back(std::move(canonical));
  }
  const std::size_t from_pool = kTotal - chosen.size();
  if (random_pool.size() < from_pool) {
    throw InsufficientCandidatesError(
        "beam provided " + std::to_string(chosen.size()) + " distinct candidates and the random pool has only " +
        std::to_string(random_pool.size()) + " entries; cannot assemble 13 pairs");
  }
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  for (std::size_t idx : sample_indices(rng, random_pool.size(), from_pool)) {
    chosen.push_back(serialize(random_pool[idx]));
  }

  std::vector<RankerExample> out;
  out.reserve(chosen.size());
  for (auto& sql : chosen) {
    bool label = sql == gold_text;
    if (!label && db != nullptr) {
      label = execution_match(gold, parse(sql), *db);
    }
    out.push_back(RankerExample{nl, std::move(sql), label});
  }
  return out;
}

}  // namespace nl2sql
