#include "m3fg/equilibrium.hpp"

#include <chrono>

#include "m3fg/errors.hpp"

namespace m3fg {

void blend_into(PolicyPair& average, const PolicyPair& best_response, double weight) {
  auto blend = [weight](std::vector<double>& avg, const std::vector<double>& br) {
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += weight * (br[i] - avg[i]);
  };
  blend(average.minor.data(), best_response.minor.data());
  blend(average.major.data(), best_response.major.data());
}

namespace {

enum class Update { Average, Replace };

SolveReport run(const GridModel& model, PolicyPair current, const SolveOptions& opts, Update update) {
  if (opts.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (opts.eval_stride < 1) throw ConfigError("eval_stride must be >= 1");
  check_policy(model.spec(), model.partition(), current);

  SolveReport report;
  report.solver = update == Update::Average ? "fp" : "fpi";
  report.bins = model.partition().bins();
  report.env = model.spec().name;
  report.horizon = model.spec().horizon;

  const auto start = std::chrono::steady_clock::now();
  auto record = [&](int n) {
    const auto e = exploitability(model, current, opts.evaluation);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.history.push_back({n, e, elapsed.count()});
  };

  record(0);
  for (int n = 0; n < opts.iterations; ++n) {
    PolicyPair br{minor_best_response(model, current, opts.best_response).policy,
                  major_best_response(model, current, opts.best_response).policy};
    if (update == Update::Average) {
      blend_into(current, br, 1.0 / (n + 1));
    } else {
      current = br;
    }
    if (opts.on_iteration) opts.on_iteration(n + 1, br, current);
    if ((n + 1) % opts.eval_stride == 0 || n + 1 == opts.iterations) record(n + 1);
  }
  report.policy = std::move(current);
  return report;
}

}  // namespace

SolveReport fictitious_play(const GridModel& model, PolicyPair init, const SolveOptions& opts) {
  return run(model, std::move(init), opts, Update::Average);
}

SolveReport fixed_point_iteration(const GridModel& model, PolicyPair init, const SolveOptions& opts) {
  return run(model, std::move(init), opts, Update::Replace);
}

}  // namespace m3fg
