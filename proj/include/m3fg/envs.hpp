#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "m3fg/game.hpp"

namespace m3fg {

/// Epidemic control. Minor states 0=S, 1=I; minor actions 0=P (prevent),
/// 1=P-bar; major states 0=L, 1=H (transmissibility regime); major actions
/// 0=F (force prevention), 1=F-bar.
struct SisParams {
  double alpha = 0.8;
  double beta = 0.2;
  double mu0_I = 0.2;
  double mu0_H = 0.5;
  double alpha0 = 0.4;
  double dt = 0.1;
  double c_I = 0.75;
  double c_P = 0.5;
  double c0_mu = 2.0;
  double c0_F = 1.0;
  int T = 300;
};

/// Buffet locations. Minor states and actions are locations 0..L-1; the major
/// state is the tuple of fillings in {0..B-1}^L encoded as sum_i x_i B^i; the
/// major action is the location to refill.
struct BuffetParams {
  int B = 5;
  int L = 2;
  double alpha = 0.7;
  double alpha0_plus = 0.9;
  double alpha0_minus = 1.0;
  double dt = 0.2;
  double c_f = 0.75;
  double c_c = 0.5;
  double c_u = 1.0;
  double c0_f = 2.0;
  double c0_b = 1.0;
  int T = 100;
};

/// Advertisement duopoly. Minor state k is "buys product k+1"; minor actions
/// 0=O (open to change), 1=C (closed); major state k means company k+1 is the
/// more aggressive advertiser; major actions 0 (average), 1 (low), 2 (high price).
struct AdvertParams {
  double dt = 0.3;
  double c = 0.05;
  double c_C = 0.75;
  double c_O = 1.0;
  double c_a = 1.0;
  double c_mu = 1.0;
  double c0_a = 0.1;
  double c0_m = 1.0;
  double lambda_C = 0.2;
  double lambda_O = 1.2;
  double k0 = 0.2;
  double k0_x = 0.5;
  double k0_u = 0.7;
  int T = 100;
};

struct TinyParams {
  int T = 2;
};

/// Throw ConfigError naming the offending quantity if a parameter set can
/// produce a probability outside [0,1].
GameSpec build_sis(const SisParams& p = {});
GameSpec build_buffet(const BuffetParams& p = {});
GameSpec build_advert(const AdvertParams& p = {});

/// Two-state, two-action test game small enough for exhaustive enumeration
/// at four bins:
///   P(x' = u | x, u, x0, u0, mu) = 0.6 + 0.2 mu(u) + 0.1 [x0 = u] - 0.1 u0, else x' = 1 - u
///   P0(x0' = u0 | x0, u0, mu)    = 0.5 + 0.4 mu(u0), else x0' = 1 - u0
///   r  = mu(x) (1 + 0.5 x0) - 0.2 [x = 1] + 0.3 [u0 = x] - 0.1 [u != x]
///   r0 = mu(x0) + 0.2 [u0 = 0] + 0.8 mu(1) u0
/// with mu0 = (0.4, 0.6), mu0_major = (0.6, 0.4).
GameSpec build_tiny_oracle(const TinyParams& p = {});

/// Affine advertisement level a_i(x0, u0) for product index i in {0, 1}.
double advert_level(const AdvertParams& p, int product, int x0, int u0);

/// Decodes a buffet major state index into per-location fillings.
std::vector<int> buffet_fillings(int index, int B, int L);

/// Known environment ids: sis, buffet, advert, tiny.
std::vector<std::string> env_ids();

/// Builds an environment from string overrides keyed by parameter name
/// (e.g. {"alpha", "0.9"}); unknown keys or malformed values throw
/// ConfigError. A gamma switches the game to the discounted objective.
GameSpec build_env(const std::string& id, const std::map<std::string, std::string>& overrides,
                   std::optional<double> gamma = std::nullopt);

/// Resolved parameter values (defaults filled in) in declaration order.
std::vector<std::pair<std::string, double>> env_parameters(const std::string& id,
                                                           const std::map<std::string, std::string>& overrides);

}  // namespace m3fg
