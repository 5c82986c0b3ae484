#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dgp {

// Whitespace tokenizer: a token is a maximal run of non-whitespace bytes
// (whitespace = space, \t, \n, \v, \f, \r). Budgets throughout the library
// are measured with this count.
std::vector<std::string_view> tokenize(std::string_view text);

std::size_t token_count(std::string_view text);

// Returns `text` unchanged when it fits the budget, otherwise the first
// `budget` tokens joined by single spaces. Requires budget >= 1.
std::string enforce_budget(std::string_view text, std::size_t budget);

}  // namespace dgp
