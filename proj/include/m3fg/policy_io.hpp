#pragma once

#include <iosfwd>
#include <string>

#include "m3fg/game.hpp"

namespace m3fg {

/// Contents of a policy file: {env, bins, horizon, minor[t][x][x0][cell][u],
/// major[t][x0][cell][u0]}, numbers printed with 17 significant digits.
struct PolicyDocument {
  std::string env;
  int bins = 0;
  Horizon horizon;
  PolicyPair policy;
};

void write_policy(std::ostream& os, const PolicyDocument& doc);

/// Throws ConfigError on malformed or ragged input.
PolicyDocument read_policy(std::istream& is);

/// Shortest-safe decimal rendering used by every CSV and JSON writer: 17
/// significant digits, '.' as separator.
std::string format_double(double v);

}  // namespace m3fg
