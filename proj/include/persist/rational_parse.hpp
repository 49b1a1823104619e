#ifndef PERSIST_RATIONAL_PARSE_HPP
#define PERSIST_RATIONAL_PARSE_HPP

#include <string_view>

#include "persist/combinatorics.hpp"

namespace persist {

/// Parses a decimal literal into an exact rational without passing through
/// binary floating point.  Accepted forms: "0.3", ".3", "3e-1", "1E-3",
/// "3/10", and any of these followed by "%" (divides by 100).
/// Throws DomainError on anything else.
ExactRational parse_exact(std::string_view text);

}  // namespace persist

#endif  // PERSIST_RATIONAL_PARSE_HPP
