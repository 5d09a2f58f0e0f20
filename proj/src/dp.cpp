#include "m3fg/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "m3fg/errors.hpp"

namespace m3fg {

namespace {

using MinorSlice = Tensor<3>;  // [x][x0][cell]
using MajorSlice = Tensor<2>;  // [x0][cell]

double discount_of(const Horizon& h) {
  if (const auto* d = std::get_if<DiscountedHorizon>(&h)) return d->gamma;
  return 1.0;
}

std::size_t argmax_lowest(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

[[noreturn]] void throw_not_converged(const char* what, const DpOptions& opts, double residual) {
  throw NumericError(std::string(what) + " did not converge within " + std::to_string(opts.max_iterations) +
                     " iterations (residual " + std::to_string(residual) + ")");
}

/// Minor Bellman backup for a fixed major policy and mean-field flow:
/// q(u) = sum_u0 pi0(u0) [ r + discount * sum_x0' P0(x0') sum_x' P(x') V(x', x0', next cell) ].
class MinorBackup {
 public:
  MinorBackup(const GridModel& m, const MajorPolicy& major, const MeanFieldFlow& flow)
      : m_(m), major_(major), flow_(flow), discount_(discount_of(m.spec().horizon)) {}

  void action_values(int t, int x, int x0, std::size_t c, const MinorSlice& next, std::span<double> q) const {
    std::fill(q.begin(), q.end(), 0.0);
    const auto pi0 = major_.row(slice_at(major_, t), x0, c);
    const int nx = m_.minor_states(), nx0 = m_.major_states();
    for (int u0 = 0; u0 < m_.major_actions(); ++u0) {
      if (pi0[u0] == 0.0) continue;
      const std::size_t cn = flow_.next(t, x0, u0, c);
      const auto p0 = m_.major_kernel(x0, u0, c);
      for (std::size_t u = 0; u < q.size(); ++u) {
        const auto p = m_.minor_kernel(x, static_cast<int>(u), x0, u0, c);
        double cont = 0.0;
        for (int x0n = 0; x0n < nx0; ++x0n) {
          if (p0[x0n] == 0.0) continue;
          double inner = 0.0;
          for (int xn = 0; xn < nx; ++xn) inner += p[xn] * next(xn, x0n, cn);
          cont += p0[x0n] * inner;
        }
        q[u] += pi0[u0] * (m_.minor_reward(x, static_cast<int>(u), x0, u0, c) + discount_ * cont);
      }
    }
  }

 private:
  const GridModel& m_;
  const MajorPolicy& major_;
  const MeanFieldFlow& flow_;
  double discount_;
};

/// q0(u0) = r0 + discount * sum_x0' P0(x0') V0(x0', next cell).
class MajorBackup {
 public:
  MajorBackup(const GridModel& m, const MeanFieldFlow& flow)
      : m_(m), flow_(flow), discount_(discount_of(m.spec().horizon)) {}

  void action_values(int t, int x0, std::size_t c, const MajorSlice& next, std::span<double> q) const {
    const int nx0 = m_.major_states();
    for (std::size_t u0 = 0; u0 < q.size(); ++u0) {
      const std::size_t cn = flow_.next(t, x0, static_cast<int>(u0), c);
      const auto p0 = m_.major_kernel(x0, static_cast<int>(u0), c);
      double cont = 0.0;
      for (int x0n = 0; x0n < nx0; ++x0n) cont += p0[x0n] * next(x0n, cn);
      q[u0] = m_.major_reward(x0, static_cast<int>(u0), c) + discount_ * cont;
    }
  }

 private:
  const GridModel& m_;
  const MeanFieldFlow& flow_;
  double discount_;
};

/// Runs backward induction (finite) or successive approximation (discounted)
/// over the minor states. `reduce(t, x, x0, c, q)` turns action values into a
/// state value; `record(t, x, x0, c, q)` sees the final action values.
template <class Reduce, class Record>
IterationStats sweep_minor(const GridModel& m, const MinorBackup& backup, const DpOptions& opts, const char* what,
                           Reduce&& reduce, Record&& record) {
  const std::size_t nx = m.minor_states(), nx0 = m.major_states(), nc = m.cells();
  std::vector<double> q(m.minor_actions());
  MinorSlice next({nx, nx0, nc}, 0.0), cur({nx, nx0, nc}, 0.0);

  auto pass = [&](int t, bool final_pass) {
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t x0 = 0; x0 < nx0; ++x0)
        for (std::size_t c = 0; c < nc; ++c) {
          backup.action_values(t, static_cast<int>(x), static_cast<int>(x0), c, next, q);
          cur(x, x0, c) = reduce(t, x, x0, c, std::span<const double>(q));
          if (final_pass) record(t, x, x0, c, std::span<const double>(q));
        }
  };

  IterationStats stats;
  if (!is_discounted(m.spec().horizon)) {
    for (int t = m.slices() - 1; t >= 0; --t) {
      pass(t, true);
      std::swap(next, cur);
    }
    return stats;
  }
  for (;;) {
    pass(0, false);
    ++stats.iterations;
    stats.residual = max_abs_diff(cur.data(), next.data());
    std::swap(next, cur);
    if (stats.residual < opts.tolerance) break;
    if (stats.iterations >= opts.max_iterations) throw_not_converged(what, opts, stats.residual);
  }
  pass(0, true);
  return stats;
}

template <class Reduce, class Record>
IterationStats sweep_major(const GridModel& m, const MajorBackup& backup, const DpOptions& opts, const char* what,
                           Reduce&& reduce, Record&& record) {
  const std::size_t nx0 = m.major_states(), nc = m.cells();
  std::vector<double> q(m.major_actions());
  MajorSlice next({nx0, nc}, 0.0), cur({nx0, nc}, 0.0);

  auto pass = [&](int t, bool final_pass) {
    for (std::size_t x0 = 0; x0 < nx0; ++x0)
      for (std::size_t c = 0; c < nc; ++c) {
        backup.action_values(t, static_cast<int>(x0), c, next, q);
        cur(x0, c) = reduce(t, x0, c, std::span<const double>(q));
        if (final_pass) record(t, x0, c, std::span<const double>(q));
      }
  };

  IterationStats stats;
  if (!is_discounted(m.spec().horizon)) {
    for (int t = m.slices() - 1; t >= 0; --t) {
      pass(t, true);
      std::swap(next, cur);
    }
    return stats;
  }
  for (;;) {
    pass(0, false);
    ++stats.iterations;
    stats.residual = max_abs_diff(cur.data(), next.data());
    std::swap(next, cur);
    if (stats.residual < opts.tolerance) break;
    if (stats.iterations >= opts.max_iterations) throw_not_converged(what, opts, stats.residual);
  }
  pass(0, true);
  return stats;
}

double minor_objective(const GridModel& m, const MinorValues& v) {
  double j = 0.0;
  const std::size_t c0 = m.initial_cell();
  for (int x = 0; x < m.minor_states(); ++x)
    for (int x0 = 0; x0 < m.major_states(); ++x0) j += m.spec().mu0[x] * m.spec().mu0_major[x0] * v(0, x, x0, c0);
  return j;
}

double major_objective(const GridModel& m, const MajorValues& v) {
  double j = 0.0;
  const std::size_t c0 = m.initial_cell();
  for (int x0 = 0; x0 < m.major_states(); ++x0) j += m.spec().mu0_major[x0] * v(0, x0, c0);
  return j;
}

void check_pair(const GridModel& m, const PolicyPair& pair) { check_policy(m.spec(), m.partition(), pair); }

}  // namespace

MinorBestResponse minor_best_response(const GridModel& m, const PolicyPair& pair, const DpOptions& opts) {
  check_pair(m, pair);
  const std::size_t T = m.slices(), nx = m.minor_states(), nu = m.minor_actions();
  const std::size_t nx0 = m.major_states(), nc = m.cells();
  const MeanFieldFlow flow(m, pair.minor);
  const MinorBackup backup(m, pair.major, flow);

  MinorBestResponse br{MinorQ({T, nx, nu, nx0, nc}), MinorPolicy({T, nx, nx0, nc, nu}, 0.0),
                       MinorValues({T, nx, nx0, nc}), 0.0, {}};
  br.stats = sweep_minor(
      m, backup, opts, "minor value iteration",
      [](int, std::size_t, std::size_t, std::size_t, std::span<const double> q) { return q[argmax_lowest(q)]; },
      [&](int t, std::size_t x, std::size_t x0, std::size_t c, std::span<const double> q) {
        const std::size_t best = argmax_lowest(q);
        for (std::size_t u = 0; u < nu; ++u) br.q(t, x, u, x0, c) = q[u];
        br.policy(t, x, x0, c, best) = 1.0;
        br.values(t, x, x0, c) = q[best];
      });
  br.objective = minor_objective(m, br.values);
  return br;
}

MajorBestResponse major_best_response(const GridModel& m, const PolicyPair& pair, const DpOptions& opts) {
  check_pair(m, pair);
  const std::size_t T = m.slices(), nx0 = m.major_states(), nu0 = m.major_actions(), nc = m.cells();
  const MeanFieldFlow flow(m, pair.minor);
  const MajorBackup backup(m, flow);

  MajorBestResponse br{MajorQ({T, nx0, nu0, nc}), MajorPolicy({T, nx0, nc, nu0}, 0.0), MajorValues({T, nx0, nc}),
                       0.0, {}};
  br.stats = sweep_major(
      m, backup, opts, "major value iteration",
      [](int, std::size_t, std::size_t, std::span<const double> q) { return q[argmax_lowest(q)]; },
      [&](int t, std::size_t x0, std::size_t c, std::span<const double> q) {
        const std::size_t best = argmax_lowest(q);
        for (std::size_t u0 = 0; u0 < nu0; ++u0) br.q(t, x0, u0, c) = q[u0];
        br.policy(t, x0, c, best) = 1.0;
        br.values(t, x0, c) = q[best];
      });
  br.objective = major_objective(m, br.values);
  return br;
}

MinorEvaluation evaluate_minor(const GridModel& m, const PolicyPair& pair, const MinorPolicy* deviation,
                               const DpOptions& opts) {
  check_pair(m, pair);
  const MinorPolicy& own = deviation ? *deviation : pair.minor;
  if (own.shape() != pair.minor.shape()) throw ConfigError("deviation policy has the wrong shape");
  if (deviation) check_policy(m.spec(), m.partition(), PolicyPair{own, pair.major});

  const std::size_t T = m.slices(), nx = m.minor_states(), nx0 = m.major_states(), nc = m.cells();
  const MeanFieldFlow flow(m, pair.minor);
  const MinorBackup backup(m, pair.major, flow);

  MinorEvaluation ev{MinorValues({T, nx, nx0, nc}), 0.0, {}};
  auto expected = [&](int t, std::size_t x, std::size_t x0, std::size_t c, std::span<const double> q) {
    const auto pi = own.row(slice_at(own, t), x, x0, c);
    double v = 0.0;
    for (std::size_t u = 0; u < q.size(); ++u) v += pi[u] * q[u];
    return v;
  };
  ev.stats = sweep_minor(m, backup, opts, "minor policy evaluation", expected,
                         [&](int t, std::size_t x, std::size_t x0, std::size_t c, std::span<const double> q) {
                           ev.values(t, x, x0, c) = expected(t, x, x0, c, q);
                         });
  ev.objective = minor_objective(m, ev.values);
  return ev;
}

MajorEvaluation evaluate_major(const GridModel& m, const PolicyPair& pair, const MajorPolicy* deviation,
                               const DpOptions& opts) {
  check_pair(m, pair);
  const MajorPolicy& own = deviation ? *deviation : pair.major;
  if (own.shape() != pair.major.shape()) throw ConfigError("deviation policy has the wrong shape");
  if (deviation) check_policy(m.spec(), m.partition(), PolicyPair{pair.minor, own});

  const std::size_t T = m.slices(), nx0 = m.major_states(), nc = m.cells();
  const MeanFieldFlow flow(m, pair.minor);
  const MajorBackup backup(m, flow);

  MajorEvaluation ev{MajorValues({T, nx0, nc}), 0.0, {}};
  auto expected = [&](int t, std::size_t x0, std::size_t c, std::span<const double> q) {
    const auto pi0 = own.row(slice_at(own, t), x0, c);
    double v = 0.0;
    for (std::size_t u0 = 0; u0 < q.size(); ++u0) v += pi0[u0] * q[u0];
    return v;
  };
  ev.stats = sweep_major(m, backup, opts, "major policy evaluation", expected,
                         [&](int t, std::size_t x0, std::size_t c, std::span<const double> q) {
                           ev.values(t, x0, c) = expected(t, x0, c, q);
                         });
  ev.objective = major_objective(m, ev.values);
  return ev;
}

Objectives evaluate(const GridModel& m, const PolicyPair& pair, const DpOptions& opts) {
  return {evaluate_minor(m, pair, nullptr, opts).objective, evaluate_major(m, pair, nullptr, opts).objective};
}

Exploitability exploitability(const GridModel& m, const PolicyPair& pair, const DpOptions& opts) {
  const auto minor_br = minor_best_response(m, pair, opts);
  const auto minor_ev = evaluate_minor(m, pair, nullptr, opts);
  const auto major_br = major_best_response(m, pair, opts);
  const auto major_ev = evaluate_major(m, pair, nullptr, opts);

  Exploitability e;
  const std::size_t c0 = m.initial_cell();
  for (int x = 0; x < m.minor_states(); ++x)
    for (int x0 = 0; x0 < m.major_states(); ++x0)
      e.minor += m.spec().mu0[x] * m.spec().mu0_major[x0] *
                 (minor_br.values(0, x, x0, c0) - minor_ev.values(0, x, x0, c0));
  for (int x0 = 0; x0 < m.major_states(); ++x0)
    e.major += m.spec().mu0_major[x0] * (major_br.values(0, x0, c0) - major_ev.values(0, x0, c0));
  e.total = e.minor + e.major;
  return e;
}

}  // namespace m3fg
