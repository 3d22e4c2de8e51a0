#include "clause/value.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "clause/error.hpp"

namespace clause {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::NotAtomic: return "not_atomic";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::KindMismatch: return "kind_mismatch";
    case ErrorCode::UnboundPlaceholder: return "unbound_placeholder";
    case ErrorCode::FragmentUnreadable: return "fragment_unreadable";
    case ErrorCode::UnknownDocType: return "unknown_doc_type";
    case ErrorCode::UnknownInstance: return "unknown_instance";
    case ErrorCode::UnknownSession: return "unknown_session";
    case ErrorCode::ValidationFailed: return "validation_failed";
    case ErrorCode::EditRejected: return "edit_rejected";
    case ErrorCode::ViolationsOutstanding: return "violations_outstanding";
    case ErrorCode::BadFilter: return "bad_filter";
    case ErrorCode::BadRequest: return "bad_request";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

namespace {

constexpr std::array<const char*, 12> kMonths = {"January", "February", "March",     "April",
                                                 "May",     "June",     "July",      "August",
                                                 "September", "October", "November", "December"};

bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

int Date::days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[static_cast<std::size_t>(month - 1)];
}

bool Date::valid(int year, int month, int day) {
  return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
         day <= days_in_month(year, month);
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  Date d;
  if (!parse_digits(text.substr(0, 4), d.year) || !parse_digits(text.substr(5, 2), d.month) ||
      !parse_digits(text.substr(8, 2), d.day))
    return std::nullopt;
  if (!valid(d.year, d.month, d.day)) return std::nullopt;
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string Date::long_form() const {
  return std::to_string(day) + " " + kMonths[static_cast<std::size_t>(month - 1)] + " " +
         std::to_string(year);
}

std::string_view kind_name(ValueKind kind) {
  switch (kind) {
    case ValueKind::String: return "string";
    case ValueKind::Integer: return "integer";
    case ValueKind::Date: return "date";
  }
  return "string";
}

std::optional<ValueKind> kind_from_name(std::string_view name) {
  if (name == "string") return ValueKind::String;
  if (name == "integer") return ValueKind::Integer;
  if (name == "date") return ValueKind::Date;
  return std::nullopt;
}

ValueKind kind_of(const Value& v) {
  switch (v.index()) {
    case 0: return ValueKind::String;
    case 1: return ValueKind::Integer;
    default: return ValueKind::Date;
  }
}

std::string format_value(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<Date>(v).long_form();
}

std::optional<Value> parse_value(ValueKind kind, std::string_view text) {
  switch (kind) {
    case ValueKind::String:
      return Value{std::string(text)};
    case ValueKind::Integer: {
      std::string_view body = text;
      if (!body.empty() && body.front() == '+') body.remove_prefix(1);
      std::int64_t out = 0;
      auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
      if (body.empty() || ec != std::errc{} || p != body.data() + body.size()) return std::nullopt;
      return Value{out};
    }
    case ValueKind::Date: {
      auto d = Date::parse_iso(text);
      if (!d) return std::nullopt;
      return Value{*d};
    }
  }
  return std::nullopt;
}

std::size_t identifier_length(std::string_view text) {
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '.' || c == '-'; };
  if (text.empty() || !head(text[0])) return 0;
  std::size_t n = 1;
  while (n < text.size() && tail(text[n])) ++n;
  return n;
}

bool is_identifier(std::string_view name) {
  return !name.empty() && identifier_length(name) == name.size();
}

}  // namespace clause
