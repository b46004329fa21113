// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/sql/resolve.hpp"

#include "sqlgrpo/common/text.hpp"
#include "sqlgrpo/sql/parser.hpp"

#include <map>
#include <optional>

namespace sqlgrpo::sql {

namespace {

struct Binding {
    std::string name;           // alias or table name as written
    const Table* table = nullptr;
    std::string base;           // schema spelling when known, as written otherwise
};

class Walker {
public:
    Walker(const Schema& schema, SchemaRefs* refs) : schema_(schema), refs_(refs) {}

    /// Resolves `s` in place.
    void walk(Select& s) {
        std::vector<Binding> scope;
        auto bind = [&](TableRef& ref) {
            Binding b;
            b.table = schema_.find_table(ref.name);
            b.name = ref.binding();
            if (b.table) {
                b.base = b.table->name;
                ref.name = b.table->name;
                if (refs_) {
                    refs_->tables.insert(b.base);
                }
            } else {
                b.base = ref.name;
                if (refs_) {
                    refs_->invalid.insert(ref.name);
                } else {
                    throw ResolutionError("unknown table '" + ref.name + "'");
                }
            }
            scope.push_back(std::move(b));
        };
        if (s.from) {
            bind(*s.from);
        }
        for (auto& j : s.joins) {
            bind(j.table);
        }

        std::map<std::string, int> base_counts;
        for (const auto& b : scope) {
            ++base_counts[to_lower(b.base)];
        }
        bool keep_aliases = false;
        for (const auto& [_, n] : base_counts) {
            keep_aliases = keep_aliases || n > 1;
        }

        auto visit = [&](Expr& e) { expr(e, scope, keep_aliases); };
        for (auto& item : s.items) {
            if (!item.star) {
                visit(item.expr);
            }
        }
        for (auto& j : s.joins) {
            visit(j.on);
        }
        if (s.where) visit(*s.where);
        for (auto& g : s.group_by) visit(g);
        if (s.having) visit(*s.having);
        for (auto& o : s.order_by) visit(o.expr);

        if (!keep_aliases) {
            if (s.from) s.from->alias.clear();
            for (auto& j : s.joins) j.table.alias.clear();
        }
    }

private:
    void expr(Expr& e, const std::vector<Binding>& scope, bool keep_aliases) {
        if (e.kind == Expr::Kind::Column) {
            column(e, scope, keep_aliases);
        }
        for (auto& a : e.args) {
            expr(a, scope, keep_aliases);
        }
        if (e.subquery) {
            walk(*e.subquery);
        }
    }

    void column(Expr& e, const std::vector<Binding>& scope, bool keep_aliases) {
        const Binding* owner = nullptr;
        std::optional<std::size_t> col;
        if (!e.table.empty()) {
            for (const auto& b : scope) {
                if (iequals(b.name, e.table)) {
                    owner = &b;
                    break;
                }
            }
            if (owner == nullptr) {
                invalid(e.table + "." + e.column, "unknown table or alias '" + e.table + "'");
                return;
            }
            if (owner->table) {
                col = owner->table->column_index(e.column);
            }
            if (!col) {
                invalid(owner->base + "." + e.column, "unknown column '" + owner->base + "." + e.column + "'");
                return;
            }
        } else {
            for (const auto& b : scope) {
                if (!b.table) {
                    continue;
                }
                if (auto idx = b.table->column_index(e.column)) {
                    if (owner != nullptr) {
                        throw AmbiguityError("ambiguous column '" + e.column + "'");
                    }
                    owner = &b;
                    col = idx;
                }
            }
            if (owner == nullptr) {
                invalid(e.column, "unknown column '" + e.column + "'");
                return;
            }
        }
        const std::string& column_name = owner->table->columns[*col].name;
        if (refs_) {
            refs_->columns.insert(owner->base + "." + column_name);
        }
        e.table = keep_aliases ? owner->name : owner->base;
        e.column = column_name;
    }

    void invalid(const std::string& name, const std::string& message) {
        if (refs_) {
            refs_->invalid.insert(name);
            return;
        }
        throw ResolutionError(message);
    }

    const Schema& schema_;
    SchemaRefs* refs_;
};

} // namespace

Select resolve(const Select& select, const Schema& schema) {
    Select out = select;
    Walker(schema, nullptr).walk(out);
    return out;
}

SchemaRefs extract_refs(const Select& select, const Schema& schema) {
    SchemaRefs refs;
    Select copy = select;
    Walker(schema, &refs).walk(copy);
    return refs;
}

std::string canonical_sql(const std::string& sql, const Schema& schema) {
    return render(resolve(parse(sql), schema));
}

} // namespace sqlgrpo::sql
