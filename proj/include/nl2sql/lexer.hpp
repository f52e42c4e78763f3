#pragma once

// Tokenizer for the SQL subset. Keywords are case-insensitive and reserved;
// identifiers are bare [A-Za-z_][A-Za-z0-9_]* words. A set of well-known SQL
// keywords outside the subset lexes as Unsupported so the parser can report
// UnsupportedFeature instead of a bare syntax error.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"

namespace nl2sql {

enum class Keyword {
  Select, From, Join, On, Where, And, Or, Group, By, Order, Limit,
  Asc, Desc, Like, True_, False_, Count, Sum, Avg, Min, Max,
};

inline const std::unordered_map<std::string, Keyword>& keyword_table() {
  static const std::unordered_map<std::string, Keyword> table = {
      {"select", Keyword::Select}, {"from", Keyword::From},   {"join", Keyword::Join},
      {"on", Keyword::On},         {"where", Keyword::Where}, {"and", Keyword::And},
      {"or", Keyword::Or},         {"group", Keyword::Group}, {"by", Keyword::By},
      {"order", Keyword::Order},   {"limit", Keyword::Limit}, {"asc", Keyword::Asc},
      {"desc", Keyword::Desc},     {"like", Keyword::Like},   {"true", Keyword::True_},
      {"false", Keyword::False_},  {"count", Keyword::Count}, {"sum", Keyword::Sum},
      {"avg", Keyword::Avg},       {"min", Keyword::Min},     {"max", Keyword::Max},
  };
  return table;
}

// Recognized SQL words the subset deliberately excludes.
inline const std::unordered_set<std::string>& unsupported_keyword_table() {
  static const std::unordered_set<std::string> table = {
      "union",  "except", "intersect", "distinct", "having", "left",   "right",
      "inner",  "outer",  "full",      "cross",    "as",     "not",    "in",
      "between", "is",    "null",      "offset",   "natural", "using", "exists",
      "insert", "update", "delete",    "create",   "drop",   "case",   "when",
  };
  return table;
}

inline bool is_reserved_word(std::string_view word) {
  std::string lower = to_lower(word);
  return keyword_table().count(lower) > 0 || unsupported_keyword_table().count(lower) > 0;
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Lexically valid bare identifier that is not a reserved word.
inline bool is_valid_identifier(std::string_view word) {
  if (word.empty() || !is_ident_start(word[0])) return false;
  for (char c : word) {
    if (!is_ident_char(c)) return false;
  }
  return !is_reserved_word(word);
}

struct Token {
  enum class Kind {
    Keyword, Ident, Int, Decimal, String, Unsupported,
    Comma, Dot, Star, LParen, RParen,
    Eq, Ne, Lt, Le, Gt, Ge,
    Eof,
  };

  Kind kind = Kind::Eof;
  Keyword keyword = Keyword::Select;  // valid iff kind == Keyword
  std::string text;                   // verbatim source text (string: decoded value)
  std::size_t offset = 0;
};

// Tokenizes the whole input. Throws SyntaxError on malformed input;
// unsupported keywords and arithmetic operators become Unsupported tokens so
// the parser can attribute them to a feature.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    Token tok;
    tok.offset = i;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(text[j])) ++j;
      tok.text = std::string(text.substr(i, j - i));
      std::string lower = to_lower(tok.text);
      if (auto it = keyword_table().find(lower); it != keyword_table().end()) {
        tok.kind = Token::Kind::Keyword;
        tok.keyword = it->second;
      } else if (unsupported_keyword_table().count(lower) > 0) {
        tok.kind = Token::Kind::Unsupported;
      } else {
        tok.kind = Token::Kind::Ident;
      }
      i = j;
    } else if (is_digit(c)) {
      std::size_t j = i;
      while (j < n && is_digit(text[j])) ++j;
      bool decimal = false;
      if (j < n && text[j] == '.' && j + 1 < n && is_digit(text[j + 1])) {
        decimal = true;
        ++j;
        while (j < n && is_digit(text[j])) ++j;
      }
      if (j < n && is_ident_start(text[j])) {
        throw SyntaxError(j, "unexpected identifier character after number");
      }
      tok.kind = decimal ? Token::Kind::Decimal : Token::Kind::Int;
      tok.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (c == '\'') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (text[j] == '\'') {
          if (j + 1 < n && text[j + 1] == '\'') {  // '' escape
            value.push_back('\'');
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value.push_back(text[j]);
        ++j;
      }
      if (!closed) throw SyntaxError(n, "unterminated string literal");
      tok.kind = Token::Kind::String;
      tok.text = std::move(value);
      i = j;
    } else {
      switch (c) {
        case ',': tok.kind = Token::Kind::Comma; ++i; break;
        case '.': tok.kind = Token::Kind::Dot; ++i; break;
        case '*': tok.kind = Token::Kind::Star; ++i; break;
        case '(': tok.kind = Token::Kind::LParen; ++i; break;
        case ')': tok.kind = Token::Kind::RParen; ++i; break;
        case '=': tok.kind = Token::Kind::Eq; ++i; break;
        case '<':
          if (i + 1 < n && text[i + 1] == '=') {
            tok.kind = Token::Kind::Le;
            i += 2;
          } else if (i + 1 < n && text[i + 1] == '>') {
            tok.kind = Token::Kind::Ne;
            i += 2;
          } else {
            tok.kind = Token::Kind::Lt;
            ++i;
          }
          break;
        case '>':
          if (i + 1 < n && text[i + 1] == '=') {
            tok.kind = Token::Kind::Ge;
            i += 2;
          } else {
            tok.kind = Token::Kind::Gt;
            ++i;
          }
          break;
        case '+': case '-': case '/': case '%': case '!':
          tok.kind = Token::Kind::Unsupported;
          tok.text = std::string(1, c);
          ++i;
          break;
        default:
          throw SyntaxError(i, std::string("unexpected character '") + c + "'");
      }
      if (tok.text.empty() && tok.kind != Token::Kind::Eof) {
        tok.text = std::string(text.substr(tok.offset, i - tok.offset));
      }
    }
    tokens.push_back(std::move(tok));
  }
  Token eof;
  eof.kind = Token::Kind::Eof;
  eof.offset = n;
  tokens.push_back(std::move(eof));
  return tokens;
}

}  // namespace nl2sql
