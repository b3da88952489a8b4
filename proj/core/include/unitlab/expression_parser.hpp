#pragma once

// Text form of unit expressions.
//
//   expression := ['+' | '-'] term { ('+' | '-') term }
//   term       := factor { '*' factor }
//   factor     := scalar | MATRIX | LABEL | twist | concat
//   scalar     := NUMBER ['i'] | '(' NUMBER ['i'] { ('+' | '-') NUMBER ['i'] } ')'
//   twist      := 'expm' '(' 't' '*' MATRIX ')'
//   concat     := 'concat' '(' LABEL '@' NUMBER { ',' LABEL '@' NUMBER } ')'
//
// Every term holds exactly one unit factor (a LABEL or a concat). Factors
// to its left multiply into a, factors to its right into b. A twist must
// touch the unit factor: "A*expm(t*B)*xi" and "xi*expm(t*B)*C" are terms,
// "expm(t*B)*A*xi" is rejected. concat lists the latest segment first.
//
// Examples: "2*xi1 - 1*xi2", "xi*expm(t*B)", "concat(u@0.5, v@0.5)",
// "xi0 + A1*xi1*B1 + A2*xi2*B2".

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "unitlab/units.hpp"

namespace unitlab {

struct ExpressionContext {
  int dim = 1;
  std::vector<std::string> labels;
  std::map<std::string, Matrix, std::less<>> matrices;
};

/// Throws ParseError with 1-based positions; `line` and `column` locate the
/// first character of `text` in its source file.
UnitExpression parse_expression(std::string_view text, const ExpressionContext& context,
                                std::size_t line = 1, std::size_t column = 1);

/// "2", "-1.5e-3", "0.5i", "1-0.5i", "(2+3i)". Throws ParseError.
Complex parse_complex(std::string_view text);

/// Shortest text that parses back to exactly the same value.
std::string format_complex(Complex value);

bool is_identifier(std::string_view text);

}  // namespace unitlab
