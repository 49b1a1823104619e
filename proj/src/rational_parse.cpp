#include "persist/rational_parse.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include <fmt/format.h>

#include "persist/errors.hpp"

namespace persist {

namespace {

[[noreturn]] void reject(std::string_view text) {
  throw DomainError(fmt::format("cannot parse '{}' as a number", text));
}

BigInt pow10(unsigned exponent) {
  BigInt out = 1;
  for (unsigned i = 0; i < exponent; ++i) out *= 10;
  return out;
}

ExactRational parse_decimal(std::string_view text, std::string_view original) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) negative = text[pos++] == '-';

  std::string digits;
  long scale = 0;  // value = digits * 10^(-scale)
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) reject(original);

  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    long exponent = 0;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [end, ec] = std::from_chars(first, last, exponent);
    if (ec != std::errc{} || end == first || std::abs(exponent) > 4000) reject(original);
    scale -= exponent;
    pos = static_cast<std::size_t>(end - text.data());
  }
  if (pos != text.size()) reject(original);

  // A leading zero would make the integer constructor read octal.
  const std::size_t nonzero = digits.find_first_not_of('0');
  digits.erase(0, nonzero == std::string::npos ? digits.size() - 1 : nonzero);
  ExactRational value{BigInt(digits)};
  if (scale > 0) value /= pow10(static_cast<unsigned>(scale));
  if (scale < 0) value *= pow10(static_cast<unsigned>(-scale));
  return negative ? ExactRational(-value) : value;
}

}  // namespace

ExactRational parse_exact(std::string_view text) {
  const std::string_view original = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool percent = false;
  if (!text.empty() && text.back() == '%') {
    percent = true;
    text.remove_suffix(1);
  }
  if (text.empty()) reject(original);

  ExactRational value;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const ExactRational den = parse_decimal(text.substr(slash + 1), original);
    if (den == 0) reject(original);
    value = parse_decimal(text.substr(0, slash), original) / den;
  } else {
    value = parse_decimal(text, original);
  }
  return percent ? ExactRational(value / 100) : value;
}

}  // namespace persist
