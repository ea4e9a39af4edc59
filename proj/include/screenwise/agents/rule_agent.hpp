#pragma once

#include <map>
#include <string>

#include "screenwise/agents/signals.hpp"
#include "screenwise/ruledsl/rules.hpp"

namespace screenwise {

/// Applies whichever rule pair of the schedule is in force at `date`.
inline ruledsl::RuleApplication rule_agent(const ruledsl::RuleSchedule& schedule, Month date,
                                           const std::map<std::string, FeatureRow>& cross_section) {
    return ruledsl::apply_rules(schedule.effective_at(date), date, cross_section);
}

}  // namespace screenwise
