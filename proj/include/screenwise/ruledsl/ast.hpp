#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <vector>

namespace screenwise::ruledsl {

enum class CompareOp { Less, Greater, LessEqual, GreaterEqual };

constexpr const char* symbol(CompareOp op) {
    switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::Greater: return ">";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::GreaterEqual: return ">=";
    }
    return "?";
}

struct Comparison {
    std::string feature;
    CompareOp op = CompareOp::Greater;
    double threshold = 0.0;

    bool operator==(const Comparison&) const = default;
};

/// Immutable boolean expression over z-score threshold comparisons.
class RuleExpr {
public:
    enum class Kind { Compare, And, Or, Not };

    static RuleExpr compare(std::string feature, CompareOp op, double threshold) {
        RuleExpr e(Kind::Compare);
        e.cmp_ = Comparison{std::move(feature), op, threshold};
        return e;
    }
    static RuleExpr both(RuleExpr left, RuleExpr right) { return binary(Kind::And, std::move(left), std::move(right)); }
    static RuleExpr either(RuleExpr left, RuleExpr right) { return binary(Kind::Or, std::move(left), std::move(right)); }
    static RuleExpr negate(RuleExpr child) {
        RuleExpr e(Kind::Not);
        e.children_.push_back(std::move(child));
        return e;
    }

    Kind kind() const { return kind_; }
    const Comparison& comparison() const {
        assert(kind_ == Kind::Compare);
        return cmp_;
    }
    const RuleExpr& left() const { return children_.at(0); }
    const RuleExpr& right() const { return children_.at(1); }
    const RuleExpr& child() const { return children_.at(0); }

    bool operator==(const RuleExpr&) const = default;

private:
    explicit RuleExpr(Kind k) : kind_(k) {}

    static RuleExpr binary(Kind k, RuleExpr l, RuleExpr r) {
        RuleExpr e(k);
        e.children_.reserve(2);
        e.children_.push_back(std::move(l));
        e.children_.push_back(std::move(r));
        return e;
    }

    Kind kind_;
    Comparison cmp_;
    std::vector<RuleExpr> children_;
};

}  // namespace screenwise::ruledsl
