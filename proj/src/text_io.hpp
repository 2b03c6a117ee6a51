#pragma once

// Line-oriented parsing helpers shared by the corpus and checkpoint readers.

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "linklda/error.hpp"

namespace linklda::detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// Splits one line into whitespace-separated fields and reports errors with
/// the source name and line number.
class FieldReader {
 public:
  FieldReader(std::string_view line, std::string source, std::size_t lineno)
      : rest_(trim(line)), source_(std::move(source)), lineno_(lineno) {}

  bool done() const { return rest_.empty(); }

  std::string_view next(const char* what) {
    if (rest_.empty()) fail(std::string("missing ") + what);
    const auto end = rest_.find_first_of(" \t");
    auto field = rest_.substr(0, end);
    rest_ = end == std::string_view::npos ? std::string_view{} : trim(rest_.substr(end));
    return field;
  }

  std::uint32_t next_uint32(const char* what) { return parse<std::uint32_t>(next(what), what); }
  std::uint64_t next_uint64(const char* what) { return parse<std::uint64_t>(next(what), what); }
  double next_double(const char* what) { return parse<double>(next(what), what); }

  std::string_view rest() const { return rest_; }

  void expect_end() {
    if (!rest_.empty()) fail("unexpected trailing field '" + std::string(rest_) + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, lineno_, what); }

 private:
  template <typename T>
  T parse(std::string_view field, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      fail(std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return value;
  }

  std::string_view rest_;
  std::string source_;
  std::size_t lineno_;
};

}  // namespace linklda::detail
