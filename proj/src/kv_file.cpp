#include "qdm/kv_file.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "qdm/error.hpp"

namespace qdm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

const std::string* KeyValueFile::find(const std::string& key) const {
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
  return it == entries.end() ? nullptr : &it->second;
}

void KeyValueFile::set(std::string key, std::string value) {
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
  if (it != entries.end()) {
    it->second = std::move(value);
  } else {
    entries.emplace_back(std::move(key), std::move(value));
  }
}

KeyValueFile parse_key_values(std::istream& in, const std::string& source) {
  KeyValueFile kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Parse, source + ":" + std::to_string(number) + ": expected `key = value`");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::Parse, source + ":" + std::to_string(number) + ": empty key");
    if (kv.find(key)) {
      throw Error(ErrorCode::Parse, source + ":" + std::to_string(number) + ": duplicate key `" + key + "`");
    }
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValueFile& kv, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& [key, value] : kv.entries) out << key << " = " << value << '\n';
}

void write_key_values(const std::filesystem::path& path, const KeyValueFile& kv, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_key_values(out, kv, comment);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string format_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_general(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace qdm
