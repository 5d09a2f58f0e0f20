#include "m3fg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>
#include <exception>

#include "m3fg/errors.hpp"

namespace m3fg {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample(std::span<const double> p, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cum += p[i];
    last_positive = static_cast<int>(i);
    if (u < cum) return last_positive;
  }
  return last_positive;
}

std::string describe(std::span<const double> mu) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? "," : "") << mu[i];
  os << ")";
  return os.str();
}

void check_row(const std::vector<double>& row, std::size_t len, std::span<const double> mu, const char* which) {
  double sum = 0.0;
  bool ok = row.size() == len;
  for (double v : row) {
    ok = ok && std::isfinite(v) && v >= 0.0;
    sum += v;
  }
  if (!ok || std::abs(sum - 1.0) > 1e-9) {
    throw NumericError(std::string("invalid ") + which + " kernel row at empirical mean field " + describe(mu));
  }
}

int horizon_of(const GridModel& model, const SimConfig& config) {
  if (config.horizon_steps) {
    if (*config.horizon_steps < 1) throw ConfigError("simulation horizon must be >= 1");
    return *config.horizon_steps;
  }
  if (const auto* f = std::get_if<FiniteHorizon>(&model.spec().horizon)) return f->steps;
  throw ConfigError("discounted games need an explicit simulation horizon");
}

void check_config(const GridModel& model, const PolicyPair& pair, const SimConfig& config) {
  if (config.n_players < 1) throw ConfigError("n_players must be >= 1");
  if (config.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!config.player_streams.empty() && config.player_streams.size() != static_cast<std::size_t>(config.n_players)) {
    throw ConfigError("player_streams must have one entry per player");
  }
  check_policy(model.spec(), model.partition(), pair);
  const int T = horizon_of(model, config);
  if (!is_discounted(model.spec().horizon) && T > model.slices()) {
    throw ConfigError("simulation horizon exceeds the policy horizon");
  }
}

template <class Fn>
void for_each_episode(int episodes, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, episodes);
  if (workers <= 1) {
    for (int e = 0; e < episodes; ++e) fn(e);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int e = w; e < episodes; e += workers) fn(e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t episode, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(episode ^ splitmix64(stream)));
}

std::pair<double, double> mean_and_ci(std::span<const double> samples) {
  if (samples.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(samples.size()))};
}

EpisodeOutcome run_episode(const GridModel& model, const PolicyPair& pair, const MinorPolicy* deviation,
                           const SimConfig& config, int episode, const StepObserver& observer) {
  const GameSpec& spec = model.spec();
  const SimplexPartition& part = model.partition();
  const int N = config.n_players;
  const int T = horizon_of(model, config);
  const double gamma = is_discounted(spec.horizon) ? std::get<DiscountedHorizon>(spec.horizon).gamma : 1.0;
  const int nx = spec.minor_states, nu = spec.minor_actions;

  std::vector<std::mt19937_64> rng;
  rng.reserve(N);
  for (int i = 0; i < N; ++i) {
    const std::uint64_t id = config.player_streams.empty() ? static_cast<std::uint64_t>(i) : config.player_streams[i];
    rng.emplace_back(stream_seed(config.seed, static_cast<std::uint64_t>(episode), id));
  }
  std::mt19937_64 major_rng(stream_seed(config.seed, static_cast<std::uint64_t>(episode), kMajorStream));

  std::vector<int> x(N);
  for (int i = 0; i < N; ++i) x[i] = sample(spec.mu0.weights(), rng[i]);
  int x0 = sample(spec.mu0_major, major_rng);

  std::vector<double> returns(N, 0.0);
  double major_return = 0.0;
  std::vector<int> counts(nx);
  std::vector<double> mu(nx);
  std::vector<std::vector<double>> kernel(static_cast<std::size_t>(nx) * nu);
  std::vector<double> reward(static_cast<std::size_t>(nx) * nu);
  double weight = 1.0;

  for (int t = 0; t < T; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int xi : x) ++counts[xi];
    if (observer) observer(t, counts, x0);
    for (int k = 0; k < nx; ++k) mu[k] = static_cast<double>(counts[k]) / N;
    const MeanField mf = MeanField::unchecked(mu);
    const std::size_t cell = part.project(mu);

    const std::size_t major_slice = slice_at(pair.major, t);
    const int u0 = sample(pair.major.row(major_slice, x0, cell), major_rng);

    for (int xs = 0; xs < nx; ++xs) {
      if (counts[xs] == 0) continue;
      for (int u = 0; u < nu; ++u) {
        auto& row = kernel[xs * nu + u];
        row = spec.minor_kernel(xs, u, x0, u0, mf);
        check_row(row, nx, mu, "minor");
        reward[xs * nu + u] = spec.minor_reward(xs, u, x0, u0, mf);
      }
    }

    for (int i = 0; i < N; ++i) {
      const MinorPolicy& pol = (i == 0 && deviation) ? *deviation : pair.minor;
      const int u = sample(pol.row(slice_at(pol, t), x[i], x0, cell), rng[i]);
      returns[i] += weight * reward[x[i] * nu + u];
      x[i] = sample(kernel[x[i] * nu + u], rng[i]);
    }

    major_return += weight * spec.major_reward(x0, u0, mf);
    const auto major_row = spec.major_kernel(x0, u0, mf);
    check_row(major_row, spec.major_states, mu, "major");
    x0 = sample(major_row, major_rng);
    weight *= gamma;
  }

  EpisodeOutcome out;
  for (double r : returns) out.minor_mean_return += r;
  out.minor_mean_return /= N;
  out.first_player_return = returns[0];
  out.major_return = major_return;
  return out;
}

SimResult simulate(const GridModel& model, const PolicyPair& pair, const SimConfig& config) {
  check_config(model, pair, config);
  std::vector<double> minor(config.episodes), major(config.episodes);
  for_each_episode(config.episodes, config.threads, [&](int e) {
    const auto out = run_episode(model, pair, nullptr, config, e);
    minor[e] = out.minor_mean_return;
    major[e] = out.major_return;
  });
  SimResult r;
  std::tie(r.minor_mean, r.minor_ci) = mean_and_ci(minor);
  std::tie(r.major_mean, r.major_ci) = mean_and_ci(major);
  r.episodes = config.episodes;
  r.n_players = config.n_players;
  return r;
}

DeviationGain deviation_gain(const GridModel& model, const PolicyPair& pair, const MinorPolicy& deviation,
                             const SimConfig& config) {
  check_config(model, pair, config);
  check_policy(model.spec(), model.partition(), PolicyPair{deviation, pair.major});
  std::vector<double> diff(config.episodes);
  for_each_episode(config.episodes, config.threads, [&](int e) {
    const auto base = run_episode(model, pair, nullptr, config, e);
    const auto dev = run_episode(model, pair, &deviation, config, e);
    diff[e] = dev.first_player_return - base.first_player_return;
  });
  DeviationGain g;
  std::tie(g.gain, g.ci) = mean_and_ci(diff);
  g.episodes = config.episodes;
  g.n_players = config.n_players;
  return g;
}

}  // namespace m3fg
