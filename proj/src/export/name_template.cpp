#include <algorithm>
#include <cctype>

#include "emr/export.hpp"

namespace emr::exporter {

namespace {

bool known_variable(std::string_view v) { return v == "name" || v == "index" || v == "date"; }

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

NameTemplate NameTemplate::parse(std::string_view raw) {
  NameTemplate t;
  t.raw_ = std::string(raw);
  std::string literal;
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '}') throw Error(Errc::UnbalancedBrace, "}", "unmatched '}' at offset " + std::to_string(i));
    if (c != '{') {
      literal += c;
      ++i;
      continue;
    }
    const std::size_t close = raw.find_first_of("{}", i + 1);
    if (close == std::string_view::npos || raw[close] != '}')
      throw Error(Errc::UnbalancedBrace, "{", "unmatched '{' at offset " + std::to_string(i));
    const std::string name(raw.substr(i + 1, close - i - 1));
    if (!known_variable(name)) throw Error(Errc::UnknownVariable, name);
    if (!literal.empty()) t.pieces_.push_back({false, std::move(literal)});
    literal.clear();
    t.pieces_.push_back({true, name});
    i = close + 1;
  }
  if (!literal.empty()) t.pieces_.push_back({false, std::move(literal)});
  return t;
}

std::string substitute_name_template(const NameTemplate& t, const TemplateVars& vars) {
  std::string out;
  for (const auto& p : t.pieces()) {
    if (!p.variable)
      out += p.text;
    else if (p.text == "name")
      out += vars.name;
    else if (p.text == "index")
      out += std::to_string(vars.index);
    else if (p.text == "date")
      out += vars.date;
    else
      throw Error(Errc::UnknownVariable, p.text);
  }
  return out;
}

OsFilenameRules OsFilenameRules::windows() {
  OsFilenameRules r;
  r.forbidden = {'\\', '/', '|', ':', '*', '?', '"', '<', '>', '\0'};
  r.forbid_control_chars = true;
  r.forbid_trailing_dot_space = true;
  r.max_length = 255;
  r.reserved = {"CON", "PRN", "AUX", "NUL"};
  for (int i = 1; i <= 9; ++i) {
    r.reserved.insert("COM" + std::to_string(i));
    r.reserved.insert("LPT" + std::to_string(i));
  }
  r.reserved_ignores_extension = true;
  return r;
}

OsFilenameRules OsFilenameRules::posix() {
  OsFilenameRules r;
  r.forbidden = {'/', '\0'};
  r.max_length = 255;
  r.reserved = {".", ".."};
  return r;
}

OsFilenameRules OsFilenameRules::host() {
#ifdef _WIN32
  return windows();
#else
  return posix();
#endif
}

std::optional<Error> validate_filename(std::string_view name, const OsFilenameRules& rules) {
  if (name.empty()) return Error(Errc::EmptyName, {}, "file name is empty");
  for (char c : name) {
    if (rules.forbidden.count(c)) return Error(Errc::ForbiddenChar, std::string(1, c));
    if (rules.forbid_control_chars && static_cast<unsigned char>(c) < 32)
      return Error(Errc::ForbiddenChar, std::string(1, c), "control character");
  }
  if (rules.forbid_trailing_dot_space && (name.back() == '.' || name.back() == ' '))
    return Error(Errc::ForbiddenChar, std::string(1, name.back()), "trailing dot or space");
  if (name.size() > rules.max_length)
    return Error(Errc::TooLong, std::to_string(name.size()), "limit is " + std::to_string(rules.max_length) + " bytes");
  std::string stem(name);
  if (rules.reserved_ignores_extension) stem = stem.substr(0, stem.find('.'));
  const bool case_insensitive = rules.reserved_ignores_extension;
  for (const std::string& r : rules.reserved) {
    if ((case_insensitive && upper(stem) == upper(r)) || (!case_insensitive && std::string(name) == r))
      return Error(Errc::ReservedName, r);
  }
  return std::nullopt;
}

}  // namespace emr::exporter
