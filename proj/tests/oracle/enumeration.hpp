#pragma once

// Brute-force reference for small finite-horizon games. Everything here works
// directly from the GameSpec callbacks and the partition; it never touches
// the tabulated model or the dynamic-programming code.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "m3fg/game.hpp"
#include "m3fg/partition.hpp"

namespace oracle {

using m3fg::GameSpec;
using m3fg::MajorPolicy;
using m3fg::MinorPolicy;
using m3fg::PolicyPair;
using m3fg::SimplexPartition;

class Enumerator {
 public:
  Enumerator(const GameSpec& spec, const SimplexPartition& part) : spec_(spec), part_(part) {
    const auto* f = std::get_if<m3fg::FiniteHorizon>(&spec.horizon);
    if (!f) throw std::invalid_argument("oracle needs a finite horizon");
    T_ = f->steps;
    nx_ = spec.minor_states;
    nu_ = spec.minor_actions;
    nx0_ = spec.major_states;
    nu0_ = spec.major_actions;
    cells_ = part.cell_count();
    c0_ = part.project(spec.mu0);
    for (std::size_t c = 0; c < cells_; ++c) {
      const auto& mu = part.representative(c);
      for (int x = 0; x < nx_; ++x)
        for (int u = 0; u < nu_; ++u)
          for (int x0 = 0; x0 < nx0_; ++x0)
            for (int u0 = 0; u0 < nu0_; ++u0) {
              kernel_.push_back(spec.minor_kernel(x, u, x0, u0, mu));
              reward_.push_back(spec.minor_reward(x, u, x0, u0, mu));
            }
      for (int x0 = 0; x0 < nx0_; ++x0)
        for (int u0 = 0; u0 < nu0_; ++u0) {
          major_kernel_.push_back(spec.major_kernel(x0, u0, mu));
          major_reward_.push_back(spec.major_reward(x0, u0, mu));
        }
    }
  }

  int horizon() const { return T_; }
  std::size_t initial_cell() const { return c0_; }

  /// Cell reached from `c` when the population plays `pop` at time t.
  std::size_t next_cell(const MinorPolicy& pop, int t, int x0, int u0, std::size_t c) const {
    const auto& mu = part_.representative(c);
    std::vector<double> out(nx_, 0.0);
    for (int x = 0; x < nx_; ++x)
      for (int u = 0; u < nu_; ++u) {
        const double w = mu[x] * pop(t, x, x0, c, u);
        const auto& row = kernel(x, u, x0, u0, c);
        for (int y = 0; y < nx_; ++y) out[y] += w * row[y];
      }
    return part_.project(out);
  }

  /// Next-cell table of the flow under `pop`, indexed [t][x0][u0][cell].
  std::vector<std::size_t> flow(const MinorPolicy& pop) const {
    std::vector<std::size_t> out;
    for (int t = 0; t < T_; ++t)
      for (int x0 = 0; x0 < nx0_; ++x0)
        for (int u0 = 0; u0 < nu0_; ++u0)
          for (std::size_t c = 0; c < cells_; ++c) out.push_back(next_cell(pop, t, x0, u0, c));
    return out;
  }

  /// Value of a minor player following `dev` from (x, x0) at t = 0, per start state.
  std::vector<double> minor_values(const PolicyPair& pair, const MinorPolicy& dev) const {
    return minor_values(pair, dev, flow(pair.minor));
  }

  std::vector<double> minor_values(const PolicyPair& pair, const MinorPolicy& dev,
                                   const std::vector<std::size_t>& fl) const {
    std::vector<double> out(nx_ * nx0_);
    for (int x = 0; x < nx_; ++x)
      for (int x0 = 0; x0 < nx0_; ++x0) {
        std::vector<double> dist(nx_ * nx0_ * cells_, 0.0);
        dist[(x * nx0_ + x0) * cells_ + c0_] = 1.0;
        double total = 0.0;
        for (int t = 0; t < T_; ++t) {
          std::vector<double> next(dist.size(), 0.0);
          for (int y = 0; y < nx_; ++y)
            for (int y0 = 0; y0 < nx0_; ++y0)
              for (std::size_t c = 0; c < cells_; ++c) {
                const double p = dist[(y * nx0_ + y0) * cells_ + c];
                if (p == 0.0) continue;
                for (int u0 = 0; u0 < nu0_; ++u0) {
                  const double p0 = p * pair.major(t, y0, c, u0);
                  if (p0 == 0.0) continue;
                  const std::size_t nc = fl[((t * nx0_ + y0) * nu0_ + u0) * cells_ + c];
                  const auto& mrow = major_kernel(y0, u0, c);
                  for (int u = 0; u < nu_; ++u) {
                    const double pu = p0 * dev(t, y, y0, c, u);
                    if (pu == 0.0) continue;
                    total += pu * reward(y, u, y0, u0, c);
                    const auto& row = kernel(y, u, y0, u0, c);
                    for (int z = 0; z < nx_; ++z)
                      for (int z0 = 0; z0 < nx0_; ++z0) next[(z * nx0_ + z0) * cells_ + nc] += pu * row[z] * mrow[z0];
                  }
                }
              }
          dist.swap(next);
        }
        out[x * nx0_ + x0] = total;
      }
    return out;
  }

  /// Value of the major player following `dev` from x0 at t = 0.
  std::vector<double> major_values(const PolicyPair& pair, const MajorPolicy& dev) const {
    return major_values(pair, dev, flow(pair.minor));
  }

  std::vector<double> major_values(const PolicyPair&, const MajorPolicy& dev,
                                   const std::vector<std::size_t>& fl) const {
    std::vector<double> out(nx0_);
    for (int x0 = 0; x0 < nx0_; ++x0) {
      std::vector<double> dist(nx0_ * cells_, 0.0);
      dist[x0 * cells_ + c0_] = 1.0;
      double total = 0.0;
      for (int t = 0; t < T_; ++t) {
        std::vector<double> next(dist.size(), 0.0);
        for (int y0 = 0; y0 < nx0_; ++y0)
          for (std::size_t c = 0; c < cells_; ++c) {
            const double p = dist[y0 * cells_ + c];
            if (p == 0.0) continue;
            for (int u0 = 0; u0 < nu0_; ++u0) {
              const double pu = p * dev(t, y0, c, u0);
              if (pu == 0.0) continue;
              total += pu * major_reward(y0, u0, c);
              const std::size_t nc = fl[((t * nx0_ + y0) * nu0_ + u0) * cells_ + c];
              const auto& mrow = major_kernel(y0, u0, c);
              for (int z0 = 0; z0 < nx0_; ++z0) next[z0 * cells_ + nc] += pu * mrow[z0];
            }
          }
        dist.swap(next);
      }
      out[x0] = total;
    }
    return out;
  }

  double minor_objective(const PolicyPair& pair, const MinorPolicy& dev) const {
    const auto v = minor_values(pair, dev);
    double j = 0.0;
    for (int x = 0; x < nx_; ++x)
      for (int x0 = 0; x0 < nx0_; ++x0) j += spec_.mu0[x] * spec_.mu0_major[x0] * v[x * nx0_ + x0];
    return j;
  }

  double major_objective(const PolicyPair& pair, const MajorPolicy& dev) const {
    const auto v = major_values(pair, dev);
    double j = 0.0;
    for (int x0 = 0; x0 < nx0_; ++x0) j += spec_.mu0_major[x0] * v[x0];
    return j;
  }

  /// Cells the flow can visit at each time when the population follows
  /// `pop` and the major player acts arbitrarily.
  std::vector<std::vector<std::size_t>> reachable_cells(const MinorPolicy& pop) const {
    std::vector<std::vector<std::size_t>> out(T_);
    out[0] = {c0_};
    for (int t = 1; t < T_; ++t) {
      std::vector<bool> seen(cells_, false);
      for (std::size_t c : out[t - 1])
        for (int x0 = 0; x0 < nx0_; ++x0)
          for (int u0 = 0; u0 < nu0_; ++u0) seen[next_cell(pop, t - 1, x0, u0, c)] = true;
      for (std::size_t c = 0; c < cells_; ++c)
        if (seen[c]) out[t].push_back(c);
    }
    return out;
  }

  /// Best values over every deterministic minor deviation defined on the
  /// reachable states, per start state, maximized independently.
  std::vector<double> best_minor_values(const PolicyPair& pair) const {
    const auto cells = reachable_cells(pair.minor);
    struct Slot {
      int t, x, x0;
      std::size_t c;
    };
    std::vector<Slot> slots;
    for (int t = 0; t < T_; ++t)
      for (std::size_t c : cells[t])
        for (int x = 0; x < nx_; ++x)
          for (int x0 = 0; x0 < nx0_; ++x0) slots.push_back({t, x, x0, c});
    MinorPolicy dev(pair.minor.shape());
    const auto fl = flow(pair.minor);
    std::vector<double> best(nx_ * nx0_, -1e300);
    for_each_assignment(slots.size(), nu_, [&](const std::vector<int>& a) {
      for (std::size_t k = 0; k < slots.size(); ++k) {
        auto row = dev.row(slots[k].t, slots[k].x, slots[k].x0, slots[k].c);
        for (int u = 0; u < nu_; ++u) row[u] = u == a[k] ? 1.0 : 0.0;
      }
      const auto v = minor_values(pair, dev, fl);
      for (std::size_t i = 0; i < v.size(); ++i) best[i] = std::max(best[i], v[i]);
    });
    return best;
  }

  std::vector<double> best_major_values(const PolicyPair& pair) const {
    const auto cells = reachable_cells(pair.minor);
    struct Slot {
      int t, x0;
      std::size_t c;
    };
    std::vector<Slot> slots;
    for (int t = 0; t < T_; ++t)
      for (std::size_t c : cells[t])
        for (int x0 = 0; x0 < nx0_; ++x0) slots.push_back({t, x0, c});
    MajorPolicy dev(pair.major.shape());
    const auto fl = flow(pair.minor);
    std::vector<double> best(nx0_, -1e300);
    for_each_assignment(slots.size(), nu0_, [&](const std::vector<int>& a) {
      for (std::size_t k = 0; k < slots.size(); ++k) {
        auto row = dev.row(slots[k].t, slots[k].x0, slots[k].c);
        for (int u = 0; u < nu0_; ++u) row[u] = u == a[k] ? 1.0 : 0.0;
      }
      const auto v = major_values(pair, dev, fl);
      for (std::size_t i = 0; i < v.size(); ++i) best[i] = std::max(best[i], v[i]);
    });
    return best;
  }

  /// Exploitability computed from the enumerated best responses.
  double total_exploitability(const PolicyPair& pair) const {
    const auto bm = best_minor_values(pair);
    const auto bM = best_major_values(pair);
    double minor = -minor_objective(pair, pair.minor), major = -major_objective(pair, pair.major);
    for (int x = 0; x < nx_; ++x)
      for (int x0 = 0; x0 < nx0_; ++x0) minor += spec_.mu0[x] * spec_.mu0_major[x0] * bm[x * nx0_ + x0];
    for (int x0 = 0; x0 < nx0_; ++x0) major += spec_.mu0_major[x0] * bM[x0];
    return minor + major;
  }

  /// Searches deterministic policy pairs of a two-step game for one with
  /// enumerated exploitability below `tol`. The last step is solved stage by
  /// stage (it cannot move the mean field that matters), the first step by
  /// trying every combination. The first-step choice is copied to every
  /// cell, so it does not depend on the mean field.
  std::optional<PolicyPair> find_equilibrium(double tol) const {
    if (T_ != 2) throw std::invalid_argument("equilibrium search is written for two steps");
    PolicyPair pair{MinorPolicy({2, std::size_t(nx_), std::size_t(nx0_), cells_, std::size_t(nu_)}),
                    MajorPolicy({2, std::size_t(nx0_), cells_, std::size_t(nu0_)})};
    for (std::size_t c = 0; c < cells_; ++c)
      for (int x0 = 0; x0 < nx0_; ++x0) {
        int b0 = 0;
        for (int u0 = 1; u0 < nu0_; ++u0)
          if (major_reward(x0, u0, c) > major_reward(x0, b0, c)) b0 = u0;
        pair.major(1, x0, c, b0) = 1.0;
        for (int x = 0; x < nx_; ++x) {
          int b = 0;
          for (int u = 1; u < nu_; ++u)
            if (reward(x, u, x0, b0, c) > reward(x, b, x0, b0, c)) b = u;
          pair.minor(1, x, x0, c, b) = 1.0;
        }
      }
    const std::size_t minor_slots = nx_ * nx0_, major_slots = nx0_;
    std::optional<PolicyPair> found;
    for_each_assignment(minor_slots + major_slots, std::max(nu_, nu0_), [&](const std::vector<int>& a) {
      if (found) return;
      for (std::size_t k = 0; k < minor_slots; ++k)
        if (a[k] >= nu_) return;
      for (std::size_t k = minor_slots; k < a.size(); ++k)
        if (a[k] >= nu0_) return;
      PolicyPair cand = pair;
      for (std::size_t c = 0; c < cells_; ++c)
        for (int x0 = 0; x0 < nx0_; ++x0) {
          for (int x = 0; x < nx_; ++x)
            for (int u = 0; u < nu_; ++u) cand.minor(0, x, x0, c, u) = 0.0;
          for (int u0 = 0; u0 < nu0_; ++u0) cand.major(0, x0, c, u0) = 0.0;
          for (int x = 0; x < nx_; ++x) cand.minor(0, x, x0, c, a[x * nx0_ + x0]) = 1.0;
          cand.major(0, x0, c, a[minor_slots + x0]) = 1.0;
        }
      if (single_deviation_gain(cand) <= tol && total_exploitability(cand) <= tol) found = std::move(cand);
    });
    return found;
  }

  /// Largest objective gain from changing the action at a single reachable
  /// state; a cheap screen before the full enumeration.
  double single_deviation_gain(const PolicyPair& pair) const {
    const auto cells = reachable_cells(pair.minor);
    const auto fl = flow(pair.minor);
    const double jm = minor_objective(pair, pair.minor), jM = major_objective(pair, pair.major);
    double gain = 0.0;
    for (int t = 0; t < T_; ++t)
      for (std::size_t c : cells[t])
        for (int x0 = 0; x0 < nx0_; ++x0) {
          for (int x = 0; x < nx_; ++x)
            for (int u = 0; u < nu_; ++u) {
              MinorPolicy dev = pair.minor;
              auto row = dev.row(t, x, x0, c);
              for (int k = 0; k < nu_; ++k) row[k] = k == u ? 1.0 : 0.0;
              gain = std::max(gain, minor_objective(pair, dev) - jm);
            }
          for (int u0 = 0; u0 < nu0_; ++u0) {
            MajorPolicy dev = pair.major;
            auto row = dev.row(t, x0, c);
            for (int k = 0; k < nu0_; ++k) row[k] = k == u0 ? 1.0 : 0.0;
            gain = std::max(gain, major_objective(pair, dev) - jM);
          }
        }
    return gain;
  }

 private:
  template <class Fn>
  static void for_each_assignment(std::size_t slots, int base, Fn&& fn) {
    std::vector<int> a(slots, 0);
    for (;;) {
      fn(a);
      std::size_t k = 0;
      while (k < slots && ++a[k] == base) a[k++] = 0;
      if (k == slots) return;
    }
  }

  std::size_t minor_index(int x, int u, int x0, int u0, std::size_t c) const {
    return (((c * nx_ + x) * nu_ + u) * nx0_ + x0) * nu0_ + u0;
  }
  const std::vector<double>& kernel(int x, int u, int x0, int u0, std::size_t c) const {
    return kernel_[minor_index(x, u, x0, u0, c)];
  }
  double reward(int x, int u, int x0, int u0, std::size_t c) const { return reward_[minor_index(x, u, x0, u0, c)]; }
  const std::vector<double>& major_kernel(int x0, int u0, std::size_t c) const {
    return major_kernel_[(c * nx0_ + x0) * nu0_ + u0];
  }
  double major_reward(int x0, int u0, std::size_t c) const { return major_reward_[(c * nx0_ + x0) * nu0_ + u0]; }

  const GameSpec& spec_;
  const SimplexPartition& part_;
  int T_ = 0, nx_ = 0, nu_ = 0, nx0_ = 0, nu0_ = 0;
  std::size_t cells_ = 0, c0_ = 0;
  std::vector<std::vector<double>> kernel_;
  std::vector<double> reward_;
  std::vector<std::vector<double>> major_kernel_;
  std::vector<double> major_reward_;
};

}  // namespace oracle
