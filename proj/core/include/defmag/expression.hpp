#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace defmag {

/// The six basic expressions, in the fixed order used for tie-breaking and
/// for confusion-matrix rows.
enum class Expression : int { AN = 0, DI, FE, HA, SA, SU };

inline constexpr std::size_t kNumExpressions = 6;
inline constexpr std::array<Expression, kNumExpressions> kAllExpressions = {
    Expression::AN, Expression::DI, Expression::FE,
    Expression::HA, Expression::SA, Expression::SU};

std::string_view to_string(Expression e);
/// Throws DataError on anything other than the six upper-case codes.
Expression parse_expression(std::string_view code);

}  // namespace defmag
