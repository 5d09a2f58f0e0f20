#include "m3fg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>

#include "m3fg/errors.hpp"

namespace m3fg {

namespace {

template <class P>
using Member = std::variant<double P::*, int P::*>;

template <class P>
struct Field {
  const char* name;
  Member<P> member;
};

template <class P>
const std::vector<Field<P>>& fields();

template <>
const std::vector<Field<SisParams>>& fields<SisParams>() {
  using P = SisParams;
  static const std::vector<Field<P>> f{
      {"alpha", &P::alpha}, {"beta", &P::beta},   {"mu0_I", &P::mu0_I}, {"mu0_H", &P::mu0_H},
      {"alpha0", &P::alpha0}, {"dt", &P::dt},     {"c_I", &P::c_I},     {"c_P", &P::c_P},
      {"c0_mu", &P::c0_mu}, {"c0_F", &P::c0_F},   {"T", &P::T}};
  return f;
}

template <>
const std::vector<Field<BuffetParams>>& fields<BuffetParams>() {
  using P = BuffetParams;
  static const std::vector<Field<P>> f{{"B", &P::B},
                                       {"L", &P::L},
                                       {"alpha", &P::alpha},
                                       {"alpha0_plus", &P::alpha0_plus},
                                       {"alpha0_minus", &P::alpha0_minus},
                                       {"dt", &P::dt},
                                       {"c_f", &P::c_f},
                                       {"c_c", &P::c_c},
                                       {"c_u", &P::c_u},
                                       {"c0_f", &P::c0_f},
                                       {"c0_b", &P::c0_b},
                                       {"T", &P::T}};
  return f;
}

template <>
const std::vector<Field<AdvertParams>>& fields<AdvertParams>() {
  using P = AdvertParams;
  static const std::vector<Field<P>> f{
      {"dt", &P::dt},         {"c", &P::c},           {"c_C", &P::c_C},   {"c_O", &P::c_O},
      {"c_a", &P::c_a},       {"c_mu", &P::c_mu},     {"c0_a", &P::c0_a}, {"c0_m", &P::c0_m},
      {"lambda_C", &P::lambda_C}, {"lambda_O", &P::lambda_O}, {"k0", &P::k0}, {"k0_x", &P::k0_x},
      {"k0_u", &P::k0_u},     {"T", &P::T}};
  return f;
}

template <>
const std::vector<Field<TinyParams>>& fields<TinyParams>() {
  static const std::vector<Field<TinyParams>> f{{"T", &TinyParams::T}};
  return f;
}

double parse_number(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  }
  return v;
}

template <class P>
P resolve(const std::string& id, const std::map<std::string, std::string>& overrides) {
  P p{};
  for (const auto& [key, text] : overrides) {
    const auto& fs = fields<P>();
    auto it = std::find_if(fs.begin(), fs.end(), [&](const Field<P>& f) { return key == f.name; });
    if (it == fs.end()) throw ConfigError("unknown key: env." + id + "." + key);
    const std::string name = "env." + id + "." + key;
    const double v = parse_number(name, text);
    std::visit(
        [&](auto P::*member) {
          auto& slot = p.*member;
          if constexpr (std::is_same_v<std::remove_reference_t<decltype(slot)>, int>) {
            if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(name + " must be an integer");
            slot = static_cast<int>(v);
          } else {
            slot = v;
          }
        },
        it->member);
  }
  return p;
}

template <class P>
std::vector<std::pair<std::string, double>> listing(const P& p) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& f : fields<P>()) {
    std::visit([&](auto m) { out.emplace_back(f.name, static_cast<double>(p.*m)); }, f.member);
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void require_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(what + " = " + std::to_string(p) + " is not a probability");
}

std::vector<double> two_point(double p_second) { return {1.0 - p_second, p_second}; }

}  // namespace

GameSpec build_sis(const SisParams& p) {
  require(p.alpha >= 0 && p.beta >= 0 && p.alpha0 >= 0 && p.dt > 0, "SIS rates must be nonnegative and dt positive");
  require(p.T >= 1, "SIS horizon T must be >= 1");
  // Worst case infection probability: high regime, no forcing, everyone infected.
  require_probability(2.5 * p.alpha * p.dt, "P(I | S, P-bar, H, F-bar, mu(I)=1)");
  require_probability(p.beta * p.dt, "P(S | I)");
  require_probability(p.alpha0 * p.dt, "P0(H | L)");
  require_probability(p.mu0_I, "mu0(I)");
  require_probability(p.mu0_H, "mu0_major(H)");

  GameSpec g;
  g.name = "sis";
  g.minor_states = g.minor_actions = g.major_states = g.major_actions = 2;
  g.minor_kernel = [p](int x, int u, int x0, int u0, const MeanField& mu) {
    if (x == 1) return two_point(1.0 - p.beta * p.dt);
    if (u == 0) return two_point(0.0);
    const double factor = 0.5 + (x0 == 1 ? 1.0 : 0.0) + (u0 == 1 ? 1.0 : 0.0);
    return two_point(factor * p.alpha * mu[1] * p.dt);
  };
  g.major_kernel = [p](int x0, int, const MeanField&) {
    const double flip = p.alpha0 * p.dt;
    return x0 == 0 ? two_point(flip) : two_point(1.0 - flip);
  };
  g.minor_reward = [p](int x, int u, int, int u0, const MeanField&) {
    const double infection = x == 1 ? p.c_I : 0.0;
    const double prevention = u == 0 ? p.c_P * ((u0 == 0 ? 1.0 : 0.0) + 0.5) : 0.0;
    return -infection - prevention;
  };
  g.major_reward = [p](int, int u0, const MeanField& mu) {
    return -p.c0_mu * mu[1] - (u0 == 0 ? p.c0_F * (0.5 - mu[1]) : 0.0);
  };
  g.mu0 = MeanField({1.0 - p.mu0_I, p.mu0_I});
  g.mu0_major = {1.0 - p.mu0_H, p.mu0_H};
  g.horizon = FiniteHorizon{p.T};
  return g;
}

std::vector<int> buffet_fillings(int index, int B, int L) {
  std::vector<int> f(L);
  for (int i = 0; i < L; ++i) {
    f[i] = index % B;
    index /= B;
  }
  return f;
}

GameSpec build_buffet(const BuffetParams& p) {
  require(p.B >= 1 && p.L >= 1, "buffet needs B >= 1 and L >= 1");
  require(p.T >= 1, "buffet horizon T must be >= 1");
  require(std::pow(static_cast<double>(p.B), p.L) <= 1e6, "buffet major state space B^L is too large");
  require(p.alpha >= 0 && p.alpha0_plus >= 0 && p.alpha0_minus >= 0 && p.dt > 0,
          "buffet rates must be nonnegative and dt positive");
  require_probability(p.alpha * p.dt, "move probability alpha*dt");
  require_probability(p.alpha0_plus * p.dt, "refill probability alpha0_plus*dt");
  require_probability(p.alpha0_minus * p.dt, "depletion probability alpha0_minus*dt at mu(n)=1");

  int n_major = 1;
  for (int i = 0; i < p.L; ++i) n_major *= p.B;

  GameSpec g;
  g.name = "buffet";
  g.minor_states = g.minor_actions = p.L;
  g.major_states = n_major;
  g.major_actions = p.L;
  g.minor_kernel = [p](int x, int u, int, int, const MeanField&) {
    std::vector<double> row(p.L, 0.0);
    if (u == x) {
      row[x] = 1.0;
    } else {
      row[u] = p.alpha * p.dt;
      row[x] = 1.0 - p.alpha * p.dt;
    }
    return row;
  };
  g.major_kernel = [p, n_major](int x0, int u0, const MeanField& mu) {
    const auto fill = buffet_fillings(x0, p.B, p.L);
    // Per-location distribution over the next filling: an independent gain at
    // the refilled location and an independent loss (impossible when empty),
    // with the net change clamped to the filling range.
    std::vector<std::vector<double>> local(p.L, std::vector<double>(p.B, 0.0));
    for (int n = 0; n < p.L; ++n) {
      const double gain = n == u0 ? p.alpha0_plus * p.dt : 0.0;
      const double loss = fill[n] > 0 ? p.alpha0_minus * mu[n] * p.dt : 0.0;
      for (int g_ev = 0; g_ev <= 1; ++g_ev) {
        for (int l_ev = 0; l_ev <= 1; ++l_ev) {
          const double w = (g_ev ? gain : 1.0 - gain) * (l_ev ? loss : 1.0 - loss);
          if (w == 0.0) continue;
          const int next = std::clamp(fill[n] + g_ev - l_ev, 0, p.B - 1);
          local[n][next] += w;
        }
      }
    }
    std::vector<double> row(n_major, 0.0);
    for (int idx = 0; idx < n_major; ++idx) {
      double w = 1.0;
      int rest = idx;
      for (int n = 0; n < p.L && w != 0.0; ++n) {
        w *= local[n][rest % p.B];
        rest /= p.B;
      }
      row[idx] = w;
    }
    return row;
  };
  g.minor_reward = [p](int x, int u, int x0, int, const MeanField& mu) {
    const auto fill = buffet_fillings(x0, p.B, p.L);
    return p.c_f * fill[x] - p.c_c * mu[x] - p.c_u * (u == x ? 0.0 : 1.0);
  };
  g.major_reward = [p](int x0, int, const MeanField&) {
    const auto fill = buffet_fillings(x0, p.B, p.L);
    double mean = 0.0;
    for (int v : fill) mean += v;
    mean /= p.L;
    double r = 0.0;
    for (int v : fill) r += p.c0_f * v - p.c0_b * std::abs(v - mean);
    return r / p.L;
  };
  std::vector<double> mu0(p.L, 0.0);
  mu0[0] = 1.0;
  g.mu0 = MeanField(std::move(mu0));
  g.mu0_major.assign(n_major, 1.0 / n_major);
  g.horizon = FiniteHorizon{p.T};
  return g;
}

double advert_level(const AdvertParams& p, int product, int x0, int u0) {
  // Products, major states and the price actions 1/2 carry the labels 1 and 2;
  // the price action 0 matches neither product.
  const int label = product + 1;
  return p.k0 + p.k0_x * (x0 + 1 == label ? 1.0 : 0.0) + p.k0_u * (u0 == label ? 1.0 : 0.0);
}

GameSpec build_advert(const AdvertParams& p) {
  require(p.dt > 0 && p.c >= 0 && p.lambda_C >= 0 && p.lambda_O >= 0 && p.k0 >= 0 && p.k0_x >= 0 && p.k0_u >= 0,
          "advertisement rates must be nonnegative and dt positive");
  require(p.T >= 1, "advertisement horizon T must be >= 1");
  require_probability(p.c * p.dt, "major flip probability c*dt");
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int u0 = 0; u0 < 3; ++u0) {
      const double diff = std::abs(advert_level(p, 0, x0, u0) - advert_level(p, 1, x0, u0));
      require_probability(diff * std::max(p.lambda_O, p.lambda_C) * p.dt,
                          "switch probability at (x0=" + std::to_string(x0) + ",u0=" + std::to_string(u0) + ")");
    }
  }

  GameSpec g;
  g.name = "advert";
  g.minor_states = 2;
  g.minor_actions = 2;
  g.major_states = 2;
  g.major_actions = 3;
  g.minor_kernel = [p](int x, int u, int x0, int u0, const MeanField&) {
    const int other = 1 - x;
    const double lambda = u == 0 ? p.lambda_O : p.lambda_C;
    const double advantage = advert_level(p, other, x0, u0) - advert_level(p, x, x0, u0);
    const double sw = std::max(0.0, advantage) * lambda * p.dt;
    std::vector<double> row(2);
    row[other] = sw;
    row[x] = 1.0 - sw;
    return row;
  };
  g.major_kernel = [p](int x0, int, const MeanField&) {
    const double flip = p.c * p.dt;
    return x0 == 0 ? two_point(flip) : two_point(1.0 - flip);
  };
  g.minor_reward = [p](int x, int u, int x0, int u0, const MeanField& mu) {
    const int other = 1 - x;
    return p.c_mu * (mu[x] - mu[other]) + p.c_a * advert_level(p, x, x0, u0) - (u == 0 ? p.c_O : p.c_C);
  };
  g.major_reward = [p](int, int u0, const MeanField& mu) {
    return -p.c0_m * std::abs(mu[0] - mu[1]) + (u0 >= 1 ? p.c0_a : 0.0);
  };
  g.mu0 = MeanField({0.5, 0.5});
  g.mu0_major = {1.0, 0.0};
  g.horizon = FiniteHorizon{p.T};
  return g;
}

GameSpec build_tiny_oracle(const TinyParams& p) {
  require(p.T >= 1, "tiny horizon T must be >= 1");
  GameSpec g;
  g.name = "tiny";
  g.minor_states = g.minor_actions = g.major_states = g.major_actions = 2;
  g.minor_kernel = [](int, int u, int x0, int u0, const MeanField& mu) {
    const double hit = 0.6 + 0.2 * mu[u] + (x0 == u ? 0.1 : 0.0) - 0.1 * u0;
    return u == 1 ? two_point(hit) : two_point(1.0 - hit);
  };
  g.major_kernel = [](int, int u0, const MeanField& mu) {
    const double hit = 0.5 + 0.4 * mu[u0];
    return u0 == 1 ? two_point(hit) : two_point(1.0 - hit);
  };
  g.minor_reward = [](int x, int u, int x0, int u0, const MeanField& mu) {
    return mu[x] * (1.0 + 0.5 * x0) - (x == 1 ? 0.2 : 0.0) + (u0 == x ? 0.3 : 0.0) - (u != x ? 0.1 : 0.0);
  };
  g.major_reward = [](int x0, int u0, const MeanField& mu) {
    return mu[x0] + (u0 == 0 ? 0.2 : 0.0) + 0.8 * mu[1] * u0;
  };
  g.mu0 = MeanField({0.4, 0.6});
  g.mu0_major = {0.6, 0.4};
  g.horizon = FiniteHorizon{p.T};
  return g;
}

std::vector<std::string> env_ids() { return {"sis", "buffet", "advert", "tiny"}; }

GameSpec build_env(const std::string& id, const std::map<std::string, std::string>& overrides,
                   std::optional<double> gamma) {
  GameSpec g;
  if (id == "sis") {
    g = build_sis(resolve<SisParams>(id, overrides));
  } else if (id == "buffet") {
    g = build_buffet(resolve<BuffetParams>(id, overrides));
  } else if (id == "advert") {
    g = build_advert(resolve<AdvertParams>(id, overrides));
  } else if (id == "tiny") {
    g = build_tiny_oracle(resolve<TinyParams>(id, overrides));
  } else {
    throw ConfigError("unknown env: " + id);
  }
  if (gamma) {
    if (!(*gamma > 0.0 && *gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    g.horizon = DiscountedHorizon{*gamma};
  }
  return g;
}

std::vector<std::pair<std::string, double>> env_parameters(const std::string& id,
                                                           const std::map<std::string, std::string>& overrides) {
  if (id == "sis") return listing(resolve<SisParams>(id, overrides));
  if (id == "buffet") return listing(resolve<BuffetParams>(id, overrides));
  if (id == "advert") return listing(resolve<AdvertParams>(id, overrides));
  if (id == "tiny") return listing(resolve<TinyParams>(id, overrides));
  throw ConfigError("unknown env: " + id);
}

}  // namespace m3fg
