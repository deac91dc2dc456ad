#pragma once

#include <string>

namespace ae1svm {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

double parse_double(const std::string& text);  // throws DataError

}  // namespace ae1svm
