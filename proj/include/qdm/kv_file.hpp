#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace qdm {

/// Flat `key = value` text: one pair per line, `#` starts a comment, blank
/// lines ignored. Order of first appearance is kept.
struct KeyValueFile {
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
  void set(std::string key, std::string value);
};

/// Throws Parse (with the line number) on malformed or duplicate keys.
KeyValueFile parse_key_values(std::istream& in, const std::string& source = "<input>");
KeyValueFile read_key_values(const std::filesystem::path& path);

void write_key_values(std::ostream& out, const KeyValueFile& kv, const std::string& comment = {});
void write_key_values(const std::filesystem::path& path, const KeyValueFile& kv, const std::string& comment = {});

/// Shortest text that reads back to the same double.
std::string format_exact(double v);
/// printf-style %.{digits}g
std::string format_general(double v, int digits);

}  // namespace qdm
