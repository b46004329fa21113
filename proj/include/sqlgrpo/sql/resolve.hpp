// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/sql/ast.hpp"

#include <set>
#include <string>

namespace sqlgrpo::sql {

/// A name that does not resolve against the schema or the FROM clause.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// An unqualified column that matches more than one FROM table.
class AmbiguityError : public ResolutionError {
public:
    using ResolutionError::ResolutionError;
};

/// Schema elements referenced by a query, by base table name.
struct SchemaRefs {
    std::set<std::string> tables;   // "actor"
    std::set<std::string> columns;  // "actor.name"
    std::set<std::string> invalid;  // names that do not resolve

    std::size_t valid_count() const { return tables.size() + columns.size(); }
};

/// Qualifies every column with its table and rewrites names to the schema's
/// spelling. Aliases are dropped unless a table appears twice in one FROM
/// clause. Throws ResolutionError (or AmbiguityError).
Select resolve(const Select& select, const Schema& schema);

/// Collects referenced tables and columns, subqueries included. Unresolvable
/// names land in `invalid`; an ambiguous column throws AmbiguityError.
SchemaRefs extract_refs(const Select& select, const Schema& schema);

/// render(resolve(parse(sql))): the form gold queries are compared in.
std::string canonical_sql(const std::string& sql, const Schema& schema);

} // namespace sqlgrpo::sql
