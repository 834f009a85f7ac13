#pragma once

// Parser for "name" / "name:key=value,key=value" strings used by the CLI
// and config files for ensembles and activations.

#include <map>
#include <string>
#include <string_view>

namespace memcap::detail {

struct TaggedParams {
  std::string name;
  std::map<std::string, double> params;

  double take(const std::string& key, double fallback);
  void expect_consumed() const;
};

TaggedParams parse_tagged(std::string_view text);

std::string lowercase(std::string_view text);

}  // namespace memcap::detail
