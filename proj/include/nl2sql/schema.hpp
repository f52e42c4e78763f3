#pragma once

// Data model schema (the "context") plus schema validation of parsed
// queries. CompiledSchema is the indexed, immutable form shared by the
// validator, the constrained decoder and the executor.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/lexer.hpp"

namespace nl2sql {

enum class ColumnType { Int, Real, Text, Bool };

inline const char* column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return "int";
    case ColumnType::Real: return "real";
    case ColumnType::Text: return "text";
    case ColumnType::Bool: return "bool";
  }
  return "?";
}

inline std::optional<ColumnType> column_type_from_name(std::string_view name) {
  if (name == "int") return ColumnType::Int;
  if (name == "real") return ColumnType::Real;
  if (name == "text") return ColumnType::Text;
  if (name == "bool") return ColumnType::Bool;
  return std::nullopt;
}

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Text;

  friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;

  friend bool operator==(const TableDef&, const TableDef&) = default;
};

struct DataModelSchema {
  std::vector<TableDef> tables;

  friend bool operator==(const DataModelSchema&, const DataModelSchema&) = default;
};

// Indexed schema. Construction enforces the schema invariants: at least one
// table, unique case-insensitive table names, unique column names per table,
// nonempty column lists, and identifiers that are lexically valid and not
// reserved words.
class CompiledSchema {
 public:
  using ColId = std::uint16_t;
  using TableId = std::uint16_t;

  struct TableInfo {
    std::string name;
    std::string lower;
    std::vector<std::string> column_names;
    std::vector<std::string> column_lowers;
    std::vector<ColumnType> column_types;
    std::vector<ColId> column_ids;  // interned lowercase-name ids, same order
  };

  explicit CompiledSchema(const DataModelSchema& schema) {
    if (schema.tables.empty()) throw SchemaError("schema must define at least one table");
    for (const auto& table : schema.tables) {
      if (!is_valid_identifier(table.name)) {
        throw SchemaError("invalid table name '" + table.name + "'");
      }
      std::string lower = to_lower(table.name);
      if (table_by_lower_.count(lower) > 0) {
        throw SchemaError("duplicate table name '" + table.name + "'");
      }
      if (table.columns.empty()) {
        throw SchemaError("table '" + table.name + "' has no columns");
      }
      TableInfo info;
      info.name = table.name;
      info.lower = lower;
      std::unordered_map<std::string, bool> seen;
      for (const auto& col : table.columns) {
        if (!is_valid_identifier(col.name)) {
          throw SchemaError("invalid column name '" + col.name + "' in table '" + table.name + "'");
        }
        std::string col_lower = to_lower(col.name);
        if (seen.count(col_lower) > 0) {
          throw SchemaError("duplicate column '" + col.name + "' in table '" + table.name + "'");
        }
        seen[col_lower] = true;
        info.column_names.push_back(col.name);
        info.column_lowers.push_back(col_lower);
        info.column_types.push_back(col.type);
        info.column_ids.push_back(intern_column(col_lower));
      }
      table_by_lower_[lower] = static_cast<TableId>(tables_.size());
      tables_.push_back(std::move(info));
    }
    tables_with_column_.resize(column_names_.size());
    for (TableId t = 0; t < tables_.size(); ++t) {
      for (ColId c : tables_[t].column_ids) tables_with_column_[c].push_back(t);
    }
    source_ = schema;
  }

  const DataModelSchema& source() const { return source_; }
  std::size_t table_count() const { return tables_.size(); }
  const TableInfo& table(TableId id) const { return tables_[id]; }

  std::optional<TableId> find_table(std::string_view name) const {
    auto it = table_by_lower_.find(to_lower(name));
    if (it == table_by_lower_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<ColId> find_column_id(std::string_view name) const {
    auto it = column_by_lower_.find(to_lower(name));
    if (it == column_by_lower_.end()) return std::nullopt;
    return it->second;
  }

  // Index of a column within a table, by case-insensitive name.
  std::optional<std::size_t> column_index(TableId table_id, std::string_view column) const {
    const TableInfo& info = tables_[table_id];
    std::string lower = to_lower(column);
    for (std::size_t i = 0; i < info.column_lowers.size(); ++i) {
      if (info.column_lowers[i] == lower) return i;
    }
    return std::nullopt;
  }

  bool table_has_column(TableId table_id, ColId col) const {
    for (ColId c : tables_[table_id].column_ids) {
      if (c == col) return true;
    }
    return false;
  }

  const std::vector<TableId>& tables_with_column(ColId col) const {
    return tables_with_column_[col];
  }

  std::size_t distinct_column_count() const { return column_names_.size(); }
  const std::string& column_lower_name(ColId id) const { return column_names_[id]; }

 private:
  ColId intern_column(const std::string& lower) {
    auto it = column_by_lower_.find(lower);
    if (it != column_by_lower_.end()) return it->second;
    ColId id = static_cast<ColId>(column_names_.size());
    column_names_.push_back(lower);
    column_by_lower_[lower] = id;
    return id;
  }

  DataModelSchema source_;
  std::vector<TableInfo> tables_;
  std::unordered_map<std::string, TableId> table_by_lower_;
  std::vector<std::string> column_names_;  // interned lowercase column names
  std::unordered_map<std::string, ColId> column_by_lower_;
  std::vector<std::vector<TableId>> tables_with_column_;  // col id -> table ids
};

using SchemaPtr = std::shared_ptr<const CompiledSchema>;

inline SchemaPtr compile_schema(const DataModelSchema& schema) {
  return std::make_shared<const CompiledSchema>(schema);
}

struct Violation {
  enum class Kind { UnknownTable, UnknownColumn, ColumnNotInScope, AmbiguousColumn };

  Kind kind = Kind::UnknownTable;
  std::string location;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline const char* violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::UnknownTable: return "UnknownTable";
    case Violation::Kind::UnknownColumn: return "UnknownColumn";
    case Violation::Kind::ColumnNotInScope: return "ColumnNotInScope";
    case Violation::Kind::AmbiguousColumn: return "AmbiguousColumn";
  }
  return "?";
}

namespace detail {

inline void check_column_ref(const ColumnRef& ref, const CompiledSchema& schema,
                             const std::vector<CompiledSchema::TableId>& scope,
                             std::vector<Violation>& out) {
  std::string where = ref.table ? *ref.table + "." + ref.column : ref.column;
  if (ref.table) {
    auto table_id = schema.find_table(*ref.table);
    if (!table_id) {
      out.push_back({Violation::Kind::UnknownTable, "table '" + *ref.table + "' in '" + where + "'"});
      return;
    }
    if (!schema.column_index(*table_id, ref.column)) {
      out.push_back({Violation::Kind::UnknownColumn, "column '" + where + "'"});
      return;
    }
    bool in_scope = false;
    for (auto t : scope) {
      if (t == *table_id) in_scope = true;
    }
    if (!in_scope) {
      out.push_back({Violation::Kind::ColumnNotInScope,
                     "table '" + *ref.table + "' of '" + where + "' not in FROM/JOIN"});
    }
    return;
  }
  auto col_id = schema.find_column_id(ref.column);
  if (!col_id) {
    out.push_back({Violation::Kind::UnknownColumn, "column '" + ref.column + "'"});
    return;
  }
  int matches = 0;
  for (auto t : scope) {
    if (schema.table_has_column(t, *col_id)) ++matches;
  }
  if (matches == 0) {
    out.push_back({Violation::Kind::ColumnNotInScope, "column '" + ref.column + "' not in any FROM/JOIN table"});
  } else if (matches > 1) {
    out.push_back({Violation::Kind::AmbiguousColumn,
                   "column '" + ref.column + "' matches multiple FROM/JOIN tables"});
  }
}

}  // namespace detail

// Context-rule check: every table exists, every column reference resolves
// against the FROM/JOIN scope, unqualified columns resolve uniquely.
// Violations are data, not failures.
inline std::vector<Violation> validate_against_schema(const SqlAst& ast,
                                                      const CompiledSchema& schema) {
  std::vector<Violation> out;
  std::vector<CompiledSchema::TableId> scope;
  for (const auto& name : scope_tables(ast)) {
    if (auto id = schema.find_table(name)) {
      scope.push_back(*id);
    } else {
      out.push_back({Violation::Kind::UnknownTable, "table '" + name + "' in FROM/JOIN"});
    }
  }
  for (const ColumnRef* ref : all_column_refs(ast)) {
    detail::check_column_ref(*ref, schema, scope, out);
  }
  return out;
}

inline std::vector<Violation> validate_against_schema(const SqlAst& ast,
                                                      const DataModelSchema& schema) {
  return validate_against_schema(ast, CompiledSchema(schema));
}

}  // namespace nl2sql
