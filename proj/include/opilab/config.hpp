#pragma once

#include <cstdint>

namespace opilab {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

// Enumeration budget: an explicit override wins, then OPILAB_BUDGET, then the default.
std::uint64_t enumeration_budget();
void set_budget_override(std::uint64_t budget);
void clear_budget_override();

// Throws BudgetExceeded when count > enumeration_budget().
void require_budget(std::uint64_t count, const char* what);

// p^e, saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t p, unsigned e);

}  // namespace opilab
