#include "tagged_params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace memcap::detail {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view key) {
  const std::string owned(trim(text));
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(owned, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (owned.empty() || consumed != owned.size()) {
    throw std::invalid_argument("parameter '" + std::string(key) + "' is not a number: '" +
                                owned + "'");
  }
  return value;
}

}  // namespace

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double TaggedParams::take(const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double value = it->second;
  params.erase(it);
  return value;
}

void TaggedParams::expect_consumed() const {
  if (!params.empty()) {
    throw std::invalid_argument("unknown parameter '" + params.begin()->first + "' for '" +
                                name + "'");
  }
}

TaggedParams parse_tagged(std::string_view text) {
  text = trim(text);
  TaggedParams out;
  const auto colon = text.find(':');
  out.name = lowercase(trim(text.substr(0, colon)));
  if (out.name.empty()) throw std::invalid_argument("empty name in '" + std::string(text) + "'");
  if (colon == std::string_view::npos) return out;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("expected key=value, got '" + std::string(item) + "'");
    }
    const std::string key = lowercase(trim(item.substr(0, eq)));
    if (!out.params.emplace(key, parse_number(item.substr(eq + 1), key)).second) {
      throw std::invalid_argument("duplicate parameter '" + key + "'");
    }
  }
  return out;
}

}  // namespace memcap::detail
