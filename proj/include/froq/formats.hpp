#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

// Text helpers shared by the file formats. Every writer in the project goes
// through these so that outputs are byte-reproducible.
namespace froq::text {

/// printf("%.9g").
std::string real9(double value);

/// Shortest representation that parses back to the identical double.
std::string shortest(double value);

/// Parses a full token as a double; throws ConfigParseError naming `context`.
double parse_real(std::string_view token, std::string_view context);

long long parse_integer(std::string_view token, std::string_view context);

std::vector<std::string_view> split(std::string_view text, char separator);

/// Lines without their terminators; a trailing newline does not produce an
/// empty final line.
std::vector<std::string_view> lines(std::string_view text);

/// Parses `# <magic> <version> key=value ...`. Returns the key/value pairs;
/// throws FormatVersionError when the version differs and ConfigParseError
/// when the magic does not match.
std::map<std::string, std::string> parse_header(std::string_view line, std::string_view magic,
                                                std::string_view version);

}  // namespace froq::text
