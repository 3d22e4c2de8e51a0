#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace clause {

// Calendar date; stored and exchanged as ISO-8601 (YYYY-MM-DD).
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
  bool operator==(const Date&) const = default;

  static std::optional<Date> parse_iso(std::string_view text);
  static bool valid(int year, int month, int day);
  static int days_in_month(int year, int month);

  std::string iso() const;
  // "3 May 1994"
  std::string long_form() const;
};

enum class ValueKind { String, Integer, Date };

std::string_view kind_name(ValueKind kind);
std::optional<ValueKind> kind_from_name(std::string_view name);

using Value = std::variant<std::string, std::int64_t, Date>;

ValueKind kind_of(const Value& v);

// Formatting used by substitution: integers in decimal, dates in long form,
// strings verbatim.
std::string format_value(const Value& v);

// Parse `text` as a value of `kind` ("30" -> 30, "1994-05-03" -> Date).
std::optional<Value> parse_value(ValueKind kind, std::string_view text);

// Identifier pattern shared by parameters and condition references:
// [A-Za-z_][A-Za-z0-9_.-]*
bool is_identifier(std::string_view name);
std::size_t identifier_length(std::string_view text);

}  // namespace clause
