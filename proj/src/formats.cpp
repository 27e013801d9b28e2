#include "froq/formats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "froq/error.hpp"

namespace froq::text {

std::string real9(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

std::string shortest(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

double parse_real(std::string_view token, std::string_view context) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
    fail(ErrorKind::kConfigParse,
         std::string(context) + ": cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, std::string_view context) {
  long long value = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
    fail(ErrorKind::kConfigParse,
         std::string(context) + ": cannot parse integer '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char separator) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(separator, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  if (text.empty()) return out;
  out = split(text, '\n');
  if (!out.empty() && out.back().empty()) out.pop_back();
  for (auto& line : out) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  return out;
}

std::map<std::string, std::string> parse_header(std::string_view line, std::string_view magic,
                                                std::string_view version) {
  const auto tokens = split(line, ' ');
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != magic) {
    fail(ErrorKind::kConfigParse, "missing '# " + std::string(magic) + "' header");
  }
  if (tokens[2] != version) {
    fail(ErrorKind::kFormatVersion, std::string(magic) + " version '" + std::string(tokens[2]) +
                                        "' is not supported (expected " + std::string(version) +
                                        ")");
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    if (tokens[i].empty()) continue;
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::kConfigParse, "malformed header field '" + std::string(tokens[i]) + "'");
    }
    fields.emplace(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
  }
  return fields;
}

}  // namespace froq::text
