// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"
#include "sqlgrpo/sql/ast.hpp"

#include <string>
#include <vector>

namespace sqlgrpo::exec {

/// Any failure to evaluate a query: unknown or ambiguous names, type errors,
/// aggregate misuse, oversized intermediate results.
class ExecutionError : public Error {
public:
    using Error::Error;
};

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<Row> rows;
    /// True iff the query had a top-level ORDER BY.
    bool ordered = false;
};

/// Evaluates a SELECT against a state with nested-loop joins and full
/// materialization.
///
/// Semantics that deviate from full SQL:
///  - comparisons involving NULL are false (no three-valued logic), so
///    NOT (x > 1) is true when x is NULL;
///  - comparing text with a number is a type error;
///  - with GROUP BY, a bare selected column takes the value from the first row
///    of its group in input order.
ResultTable execute(const sql::Select& select, const Schema& schema, const DatabaseState& state);

/// Positional comparison ignoring column names. Sequences when either side is
/// ordered, multisets otherwise. Reals match within relative tolerance.
bool compare_results(const ResultTable& a, const ResultTable& b, double rel_tol = 1e-9);

} // namespace sqlgrpo::exec
