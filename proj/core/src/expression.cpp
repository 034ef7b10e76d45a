#include "defmag/expression.hpp"

#include <string>

#include "defmag/error.hpp"

namespace defmag {

std::string_view to_string(Expression e) {
  switch (e) {
    case Expression::AN: return "AN";
    case Expression::DI: return "DI";
    case Expression::FE: return "FE";
    case Expression::HA: return "HA";
    case Expression::SA: return "SA";
    case Expression::SU: return "SU";
  }
  return "??";
}

Expression parse_expression(std::string_view code) {
  for (auto e : kAllExpressions) {
    if (to_string(e) == code) return e;
  }
  throw DataError("unknown expression label '" + std::string(code) +
                  "' (expected AN, DI, FE, HA, SA or SU)");
}

}  // namespace defmag
