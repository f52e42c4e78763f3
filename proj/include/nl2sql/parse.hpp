#pragma once

// Recursive-descent parser for the SQL subset. Produces the unique AST for a
// valid query; reports SyntaxError with the byte offset of the first failure
// and UnsupportedFeature for recognizable SQL outside the subset.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/lexer.hpp"

namespace nl2sql {

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  SqlAst parse_query() {
    SqlAst ast;
    expect_keyword(Keyword::Select, "expected SELECT");
    ast.select_items.push_back(parse_select_item());
    while (accept(Token::Kind::Comma)) ast.select_items.push_back(parse_select_item());
    expect_keyword(Keyword::From, "expected FROM");
    ast.from_table = parse_table_name();
    while (at_keyword(Keyword::Join)) {
      next();
      Join join;
      std::size_t table_offset = peek().offset;
      join.table = parse_table_name();
      for (const auto& name : scope_tables(ast)) {
        if (iequals(name, join.table)) {
          throw UnsupportedFeature(table_offset,
                                   "self-joins require table aliases, which are not supported");
        }
      }
      expect_keyword(Keyword::On, "expected ON");
      join.on_left = parse_column_ref();
      expect(Token::Kind::Eq, "expected '=' in join condition");
      join.on_right = parse_column_ref();
      ast.joins.push_back(std::move(join));
    }
    if (at_keyword(Keyword::Where)) {
      next();
      ast.where = parse_or_expr();
    }
    if (at_keyword(Keyword::Group)) {
      next();
      expect_keyword(Keyword::By, "expected BY after GROUP");
      ast.group_by.push_back(parse_column_ref());
      while (accept(Token::Kind::Comma)) ast.group_by.push_back(parse_column_ref());
    }
    if (at_keyword(Keyword::Order)) {
      next();
      expect_keyword(Keyword::By, "expected BY after ORDER");
      ast.order_by.push_back(parse_order_item());
      while (accept(Token::Kind::Comma)) ast.order_by.push_back(parse_order_item());
    }
    if (at_keyword(Keyword::Limit)) {
      next();
      const Token& tok = peek();
      if (tok.kind != Token::Kind::Int) throw SyntaxError(tok.offset, "expected integer after LIMIT");
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
      if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
        throw SyntaxError(tok.offset, "LIMIT value out of range");
      }
      ast.limit = value;
      next();
    }
    const Token& tail = peek();
    if (tail.kind == Token::Kind::Unsupported) {
      throw UnsupportedFeature(tail.offset, "'" + tail.text + "' is outside the supported SQL subset");
    }
    if (tail.kind != Token::Kind::Eof) {
      throw SyntaxError(tail.offset, "unexpected trailing input");
    }
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  void next() { ++pos_; }

  bool at_keyword(Keyword k) const {
    return peek().kind == Token::Kind::Keyword && peek().keyword == k;
  }

  bool accept(Token::Kind kind) {
    if (peek().kind == kind) {
      next();
      return true;
    }
    return false;
  }

  void expect(Token::Kind kind, const std::string& message) {
    const Token& tok = peek();
    if (tok.kind != kind) fail(tok, message);
    next();
  }

  void expect_keyword(Keyword k, const std::string& message) {
    const Token& tok = peek();
    if (tok.kind != Token::Kind::Keyword || tok.keyword != k) fail(tok, message);
    next();
  }

  [[noreturn]] void fail(const Token& tok, const std::string& message) const {
    if (tok.kind == Token::Kind::Unsupported) {
      throw UnsupportedFeature(tok.offset, "'" + tok.text + "' is outside the supported SQL subset");
    }
    throw SyntaxError(tok.offset, message);
  }

  std::string parse_identifier(const std::string& what) {
    const Token& tok = peek();
    if (tok.kind != Token::Kind::Ident) fail(tok, "expected " + what);
    std::string name = tok.text;
    next();
    return name;
  }

  std::string parse_table_name() {
    std::string name = parse_identifier("table name");
    // a second bare identifier would be an alias
    if (peek().kind == Token::Kind::Ident) {
      throw UnsupportedFeature(peek().offset, "table aliases are not supported");
    }
    return name;
  }

  ColumnRef parse_column_ref() {
    ColumnRef ref;
    std::string first = parse_identifier("column name");
    if (accept(Token::Kind::Dot)) {
      ref.table = std::move(first);
      ref.column = parse_identifier("column name after '.'");
    } else {
      ref.column = std::move(first);
    }
    return ref;
  }

  bool at_aggregate() const {
    if (peek().kind != Token::Kind::Keyword) return false;
    switch (peek().keyword) {
      case Keyword::Count: case Keyword::Sum: case Keyword::Avg:
      case Keyword::Min: case Keyword::Max:
        return true;
      default:
        return false;
    }
  }

  Aggregate parse_aggregate() {
    Aggregate agg;
    switch (peek().keyword) {
      case Keyword::Count: agg.func = AggFunc::Count; break;
      case Keyword::Sum: agg.func = AggFunc::Sum; break;
      case Keyword::Avg: agg.func = AggFunc::Avg; break;
      case Keyword::Min: agg.func = AggFunc::Min; break;
      case Keyword::Max: agg.func = AggFunc::Max; break;
      default: fail(peek(), "expected aggregate function");
    }
    next();
    expect(Token::Kind::LParen, "expected '(' after aggregate function");
    if (peek().kind == Token::Kind::Star) {
      if (agg.func != AggFunc::Count) {
        throw SyntaxError(peek().offset, "only COUNT may take *");
      }
      agg.arg = Star{};
      next();
    } else {
      agg.arg = parse_column_ref();
    }
    expect(Token::Kind::RParen, "expected ')'");
    return agg;
  }

  SelectItem parse_select_item() {
    if (peek().kind == Token::Kind::Star) {
      next();
      return Star{};
    }
    if (at_aggregate()) return parse_aggregate();
    if (peek().kind == Token::Kind::LParen) {
      throw UnsupportedFeature(peek().offset, "parenthesized expressions and subqueries are not supported");
    }
    if (peek().kind != Token::Kind::Ident) fail(peek(), "expected select item");
    return parse_column_ref();
  }

  OrderItem parse_order_item() {
    OrderItem item;
    if (at_aggregate()) {
      item.expr = parse_aggregate();
    } else {
      item.expr = parse_column_ref();
    }
    if (at_keyword(Keyword::Asc)) {
      item.dir = SortDir::Asc;
      next();
    } else if (at_keyword(Keyword::Desc)) {
      item.dir = SortDir::Desc;
      next();
    }
    return item;
  }

  Literal parse_literal() {
    const Token& tok = peek();
    Literal lit;
    switch (tok.kind) {
      case Token::Kind::Int: {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
          throw SyntaxError(tok.offset, "integer literal out of range");
        }
        lit.value = value;
        break;
      }
      case Token::Kind::Decimal: {
        lit.value = std::stod(tok.text);
        break;
      }
      case Token::Kind::String:
        lit.value = tok.text;
        break;
      case Token::Kind::Keyword:
        if (tok.keyword == Keyword::True_) {
          lit.value = true;
        } else if (tok.keyword == Keyword::False_) {
          lit.value = false;
        } else {
          fail(tok, "expected literal");
        }
        break;
      default:
        fail(tok, "expected literal");
    }
    next();
    return lit;
  }

  Comparison parse_comparison() {
    if (peek().kind == Token::Kind::LParen) {
      throw UnsupportedFeature(peek().offset, "parenthesized conditions are not supported");
    }
    Comparison cmp;
    cmp.lhs = parse_column_ref();
    const Token& op = peek();
    switch (op.kind) {
      case Token::Kind::Eq: cmp.op = CompareOp::Eq; break;
      case Token::Kind::Ne: cmp.op = CompareOp::Ne; break;
      case Token::Kind::Lt: cmp.op = CompareOp::Lt; break;
      case Token::Kind::Le: cmp.op = CompareOp::Le; break;
      case Token::Kind::Gt: cmp.op = CompareOp::Gt; break;
      case Token::Kind::Ge: cmp.op = CompareOp::Ge; break;
      case Token::Kind::Keyword:
        if (op.keyword == Keyword::Like) {
          cmp.op = CompareOp::Like;
          break;
        }
        fail(op, "expected comparison operator");
      default:
        fail(op, "expected comparison operator");
    }
    next();
    const Token& rhs = peek();
    if (rhs.kind == Token::Kind::Ident) {
      cmp.rhs = parse_column_ref();
    } else {
      cmp.rhs = parse_literal();
    }
    return cmp;
  }

  BoolExpr parse_and_expr() {
    BoolExpr lhs = BoolExpr::leaf(parse_comparison());
    while (at_keyword(Keyword::And)) {
      next();
      lhs = BoolExpr::combine(BoolExpr::Kind::And, std::move(lhs), BoolExpr::leaf(parse_comparison()));
    }
    return lhs;
  }

  BoolExpr parse_or_expr() {
    BoolExpr lhs = parse_and_expr();
    while (at_keyword(Keyword::Or)) {
      next();
      lhs = BoolExpr::combine(BoolExpr::Kind::Or, std::move(lhs), parse_and_expr());
    }
    return lhs;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline SqlAst parse(std::string_view text) { return detail::Parser(text).parse_query(); }

// Human-readable grammar reference, emitted by `grammar print`.
inline std::string grammar_ebnf() {
  return R"ebnf(query        = "SELECT" select-list "FROM" table-name { join }
               [ "WHERE" condition ] [ "GROUP" "BY" column-ref { "," column-ref } ]
               [ "ORDER" "BY" order-item { "," order-item } ] [ "LIMIT" integer ] ;
select-list  = select-item { "," select-item } ;
select-item  = "*" | column-ref | aggregate ;
aggregate    = "COUNT" "(" ( "*" | column-ref ) ")"
             | ( "SUM" | "AVG" | "MIN" | "MAX" ) "(" column-ref ")" ;
join         = "JOIN" table-name "ON" column-ref "=" column-ref ;
condition    = conjunction { "OR" conjunction } ;
conjunction  = comparison { "AND" comparison } ;
comparison   = column-ref op ( literal | column-ref ) ;
op           = "=" | "<>" | "<" | "<=" | ">" | ">=" | "LIKE" ;
order-item   = ( column-ref | aggregate ) [ "ASC" | "DESC" ] ;
column-ref   = identifier [ "." identifier ] ;
table-name   = identifier ;
literal      = integer | decimal | string | "TRUE" | "FALSE" ;
identifier   = letter-or-underscore { letter-or-digit-or-underscore } ;  (* not a reserved word *)
integer      = digit { digit } ;
decimal      = digit { digit } "." digit { digit } ;
string       = "'" { any-char-or-doubled-quote } "'" ;

Keywords are case-insensitive. Table names in FROM/JOIN must be pairwise
distinct (self-joins would require aliases, which are not supported).
)ebnf";
}

}  // namespace nl2sql
