#pragma once

// Small hand-built games shared by the unit tests.

#include <cmath>
#include <vector>

#include "m3fg/game.hpp"

namespace fixtures {

using m3fg::GameSpec;
using m3fg::MeanField;

/// Every minor player stays where it is; rewards are constant.
inline GameSpec identity_game(int nx, int nu, int nx0, int nu0, double reward = 0.0, double major_reward = 0.0) {
  GameSpec g;
  g.name = "identity";
  g.minor_states = nx;
  g.minor_actions = nu;
  g.major_states = nx0;
  g.major_actions = nu0;
  g.minor_kernel = [nx](int x, int, int, int, const MeanField&) {
    std::vector<double> p(nx, 0.0);
    p[x] = 1.0;
    return p;
  };
  g.major_kernel = [nx0](int x0, int, const MeanField&) {
    std::vector<double> p(nx0, 0.0);
    p[x0] = 1.0;
    return p;
  };
  g.minor_reward = [reward](int, int, int, int, const MeanField&) { return reward; };
  g.major_reward = [major_reward](int, int, const MeanField&) { return major_reward; };
  g.mu0 = MeanField(std::vector<double>(nx, 1.0 / nx));
  g.mu0_major = std::vector<double>(nx0, 1.0 / nx0);
  g.horizon = m3fg::FiniteHorizon{3};
  return g;
}

/// Every transition lands on the uniform distribution.
inline GameSpec uniform_kernel_game(int nx, int nu) {
  GameSpec g = identity_game(nx, nu, 1, 1);
  g.minor_kernel = [nx](int, int, int, int, const MeanField&) { return std::vector<double>(nx, 1.0 / nx); };
  return g;
}

/// Two minor and two major states; the next state equals the chosen action
/// for both players. Minor players want to sit where the major player is, the
/// major player wants to sit where the minor players are not.
inline GameSpec pursuit_game(int steps) {
  GameSpec g = identity_game(2, 2, 2, 2);
  g.name = "pursuit";
  g.minor_kernel = [](int, int u, int, int, const MeanField&) {
    return u == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  g.major_kernel = [](int, int u0, const MeanField&) {
    return u0 == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  g.minor_reward = [](int x, int, int x0, int, const MeanField&) { return x == x0 ? 1.0 : 0.0; };
  g.major_reward = [](int x0, int, const MeanField& mu) { return 1.0 - mu[x0]; };
  g.mu0 = MeanField({1.0, 0.0});
  g.mu0_major = {1.0, 0.0};
  g.horizon = m3fg::FiniteHorizon{steps};
  return g;
}

/// Mean field dependent kernel that is deliberately smooth in mu; used for
/// property tests on random inputs.
inline GameSpec smooth_game(int nx, int nu, int nx0, int nu0) {
  GameSpec g = identity_game(nx, nu, nx0, nu0);
  g.name = "smooth";
  g.minor_kernel = [nx](int x, int u, int x0, int u0, const MeanField& mu) {
    std::vector<double> w(nx);
    double s = 0.0;
    for (int y = 0; y < nx; ++y) {
      w[y] = 1.0 + mu[y] + 0.5 * ((x + u + y) % nx == 0) + 0.25 * ((x0 + u0 + y) % 2);
      s += w[y];
    }
    for (double& v : w) v /= s;
    return w;
  };
  g.major_kernel = [nx0](int x0, int u0, const MeanField& mu) {
    std::vector<double> w(nx0);
    double s = 0.0;
    for (int y = 0; y < nx0; ++y) {
      w[y] = 1.0 + mu[0] * (y == u0) + 0.3 * (y == x0);
      s += w[y];
    }
    for (double& v : w) v /= s;
    return w;
  };
  g.minor_reward = [](int x, int u, int x0, int u0, const MeanField& mu) {
    return std::sin(1.0 + x + 2.0 * u) * mu[x] - 0.1 * u0 + 0.2 * x0 * mu[0];
  };
  g.major_reward = [](int x0, int u0, const MeanField& mu) { return std::cos(x0 + 0.5 * u0) + mu[0] * u0; };
  return g;
}

}  // namespace fixtures
