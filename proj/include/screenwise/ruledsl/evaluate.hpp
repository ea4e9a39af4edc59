#pragma once

#include <set>
#include <string>

#include "screenwise/core/error.hpp"
#include "screenwise/data/characteristics.hpp"
#include "screenwise/ruledsl/ast.hpp"

namespace screenwise::ruledsl {

inline void collect_features(const RuleExpr& expr, std::set<std::string>& out) {
    if (expr.kind() == RuleExpr::Kind::Compare) {
        out.insert(expr.comparison().feature);
    } else if (expr.kind() == RuleExpr::Kind::Not) {
        collect_features(expr.child(), out);
    } else {
        collect_features(expr.left(), out);
        collect_features(expr.right(), out);
    }
}

inline std::set<std::string> referenced_features(const RuleExpr& expr) {
    std::set<std::string> out;
    collect_features(expr, out);
    return out;
}

namespace detail {

inline bool eval(const RuleExpr& expr, const FeatureRow& row) {
    using K = RuleExpr::Kind;
    switch (expr.kind()) {
    case K::Compare: {
        const auto& c = expr.comparison();
        const double x = row.at(c.feature);
        switch (c.op) {
        case CompareOp::Less: return x < c.threshold;
        case CompareOp::Greater: return x > c.threshold;
        case CompareOp::LessEqual: return x <= c.threshold;
        case CompareOp::GreaterEqual: return x >= c.threshold;
        }
        return false;
    }
    case K::And: return eval(expr.left(), row) && eval(expr.right(), row);
    case K::Or: return eval(expr.left(), row) || eval(expr.right(), row);
    case K::Not: return !eval(expr.child(), row);
    }
    return false;
}

}  // namespace detail

/// Evaluates `expr` against one asset's z-scores. Every feature the rule
/// mentions must be present in `row`, whether or not evaluation reaches it.
inline bool evaluate_rule(const RuleExpr& expr, const FeatureRow& row) {
    for (const auto& f : referenced_features(expr))
        if (!row.count(f)) throw Error(ErrorCode::NotFound, "missing feature '" + f + "'");
    return detail::eval(expr, row);
}

}  // namespace screenwise::ruledsl
