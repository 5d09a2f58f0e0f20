// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
//
//   acceptance [--work-dir DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "m3fg/cli.hpp"
#include "m3fg/dp.hpp"
#include "m3fg/envs.hpp"
#include "m3fg/equilibrium.hpp"
#include "m3fg/errors.hpp"
#include "m3fg/model.hpp"
#include "m3fg/policy_io.hpp"
#include "m3fg/simulator.hpp"
#include "oracle/enumeration.hpp"

using namespace m3fg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> totals(const SolveReport& rep) {
  std::vector<double> out;
  for (const auto& h : rep.history) out.push_back(h.exploitability.total);
  return out;
}

double stddev(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (xs.size() - 1));
}

// 1. Every kernel row at every grid representative is a distribution.
Outcome kernel_validity() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t rows = 0;
  double worst = 0.0;
  std::vector<std::string> problems;
  for (const char* id : {"sis", "buffet", "advert"}) {
    const GameSpec g = build_env(id, {});
    for (int bins : {15, 120}) {
      const SimplexPartition p(g.minor_states, bins);
      for (const auto& v : validate(g, p)) problems.push_back(std::string(id) + ": " + v);
      auto check = [&](const std::vector<double>& row) {
        double s = 0.0;
        for (double q : row) {
          if (!(q >= 0.0 && q <= 1.0)) problems.push_back(std::string(id) + ": entry " + num(q));
          s += q;
        }
        worst = std::max(worst, std::abs(s - 1.0));
        ++rows;
      };
      for (std::size_t c = 0; c < p.cell_count(); ++c) {
        const MeanField mu = p.representative(c);
        for (int x0 = 0; x0 < g.major_states; ++x0)
          for (int u0 = 0; u0 < g.major_actions; ++u0) {
            check(g.major_kernel(x0, u0, mu));
            for (int x = 0; x < g.minor_states; ++x)
              for (int u = 0; u < g.minor_actions; ++u) check(g.minor_kernel(x, u, x0, u0, mu));
          }
      }
    }
  }
  const double secs = seconds_since(start);
  const bool ok = problems.empty() && worst <= 1e-12 && secs < 10.0;
  return {ok, std::to_string(rows) + " rows, max |sum-1| " + num(worst) + ", " + std::to_string(problems.size()) +
                  " violations, " + num(secs) + " s"};
}

PolicyPair random_pair(const GameSpec& g, const SimplexPartition& p, unsigned seed) {
  PolicyPair pair = uniform_policy(g, p);
  std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 1;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0 + 1e-3;
  };
  auto fill = [&](std::vector<double>& data, std::size_t width) {
    for (std::size_t i = 0; i < data.size(); i += width) {
      double s = 0.0;
      for (std::size_t k = 0; k < width; ++k) s += data[i + k] = next();
      for (std::size_t k = 0; k < width; ++k) data[i + k] /= s;
    }
  };
  fill(pair.minor.data(), g.minor_actions);
  fill(pair.major.data(), g.major_actions);
  return pair;
}

// 2. Dynamic programming agrees with brute-force enumeration on the tiny game.
Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec g = build_tiny_oracle();
  const SimplexPartition p(2, 4);
  const GridModel model(g, p);
  const oracle::Enumerator en(g, p);
  double worst = 0.0;
  for (unsigned seed = 0; seed < 6; ++seed) {
    const PolicyPair pair = seed == 0   ? first_action_policy(g, p)
                            : seed == 1 ? uniform_policy(g, p)
                                        : random_pair(g, p, seed);
    const auto br = minor_best_response(model, pair);
    const auto best = en.best_minor_values(pair);
    for (int x = 0; x < 2; ++x)
      for (int x0 = 0; x0 < 2; ++x0)
        worst = std::max(worst, std::abs(br.values(0, x, x0, model.initial_cell()) - best[x * 2 + x0]));
    const auto mbr = major_best_response(model, pair);
    const auto mbest = en.best_major_values(pair);
    for (int x0 = 0; x0 < 2; ++x0)
      worst = std::max(worst, std::abs(mbr.values(0, x0, model.initial_cell()) - mbest[x0]));
  }
  const auto eq = en.find_equilibrium(1e-10);
  const double e = eq ? exploitability(model, *eq).total : INFINITY;
  const double secs = seconds_since(start);
  const bool ok = worst <= 1e-10 && eq.has_value() && e <= 1e-10 && secs < 60.0;
  return {ok, "max value gap " + num(worst) + ", equilibrium exploitability " + num(e) + ", " + num(secs) + " s"};
}

// 3. Fictitious play drives exploitability down on the buffet game.
Outcome buffet_fictitious_play() {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec g = build_buffet(BuffetParams{});
  const SimplexPartition p(g.minor_states, 60);
  const GridModel model(g, p);
  SolveOptions opts;
  opts.iterations = 200;
  const auto e = totals(fictitious_play(model, first_action_policy(g, p), opts));
  const double first = e[1], last = e.back();
  bool settled = true;
  double worst_rise = 0.0;
  double running_max = e[5];
  for (std::size_t n = 6; n < e.size(); ++n) {
    const double rise = e[n] - e[n - 1];
    worst_rise = std::max(worst_rise, rise / running_max);
    if (rise > 0.05 * running_max) settled = false;
    running_max = std::max(running_max, e[n]);
  }
  const bool ok = last <= 0.1 * first && settled;
  return {ok, "iteration 1 " + num(first) + ", iteration 200 " + num(last) + ", largest rise " + num(worst_rise) +
                  " of running max, " + num(seconds_since(start)) + " s"};
}

// 4. Fixed-point iteration oscillates where fictitious play settles.
Outcome fixed_point_oscillation() {
  const GameSpec g = build_sis(SisParams{});
  const SimplexPartition p(2, 60);
  const GridModel model(g, p);
  SolveOptions opts;
  opts.iterations = 100;
  const auto fp = totals(fictitious_play(model, first_action_policy(g, p), opts));
  const auto fpi = totals(fixed_point_iteration(model, first_action_policy(g, p), opts));
  const std::vector<double> fp_tail(fp.end() - 50, fp.end()), fpi_tail(fpi.end() - 50, fpi.end());
  const double s_fp = stddev(fp_tail), s_fpi = stddev(fpi_tail);
  return {s_fpi >= 2.0 * s_fp, "std of last 50: fpi " + num(s_fpi) + ", fp " + num(s_fp)};
}

// 5. Objectives converge as the grid is refined.
Outcome discretization_convergence() {
  const GameSpec g = build_sis(SisParams{});
  std::vector<Objectives> j;
  for (int bins : {15, 30, 60, 120}) {
    const SimplexPartition p(2, bins);
    j.push_back(evaluate(GridModel(g, p), uniform_policy(g, p)));
  }
  std::vector<double> gm, gM;
  for (int k = 0; k < 3; ++k) {
    gm.push_back(std::abs(j[k].minor - j[3].minor));
    gM.push_back(std::abs(j[k].major - j[3].major));
  }
  const bool monotone = gm[1] <= gm[0] && gm[2] <= gm[1] && gM[1] <= gM[0] && gM[2] <= gM[1];
  const bool halving = gm[2] <= 0.6 * gm[1] + 1e-6;
  return {monotone && halving, "minor gaps " + num(gm[0]) + " " + num(gm[1]) + " " + num(gm[2]) + ", major gaps " +
                                   num(gM[0]) + " " + num(gM[1]) + " " + num(gM[2])};
}

// 6. N-player returns approach the mean-field value.
Outcome propagation_of_chaos() {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec g = build_sis(SisParams{});
  const SimplexPartition p(2, 120);
  const GridModel model(g, p);
  const PolicyPair pair = uniform_policy(g, p);
  const double limit = evaluate(model, pair).minor;
  std::vector<double> gap, ci;
  std::string detail;
  for (int n : {2, 10, 50, 200, 1000}) {
    SimConfig cfg;
    cfg.n_players = n;
    cfg.episodes = 1000;
    cfg.seed = 7;
    const SimResult r = simulate(model, pair, cfg);
    gap.push_back(std::abs(r.minor_mean - limit));
    ci.push_back(r.minor_ci);
    detail += "N=" + std::to_string(n) + " " + num(gap.back()) + "+-" + num(ci.back()) + " ";
  }
  bool monotone = true;
  for (std::size_t k = 1; k < gap.size(); ++k)
    if (gap[k] > gap[k - 1] + ci[k] + ci[k - 1]) monotone = false;
  const bool shrinks = gap.back() <= 0.25 * gap.front();
  return {monotone && shrinks, detail + num(seconds_since(start)) + " s"};
}

// 7. The enumerated equilibrium is an approximate Nash equilibrium of the
// N-player game, with deviation gains shrinking like 1/sqrt(N).
Outcome approximate_nash() {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec g = build_tiny_oracle();
  const SimplexPartition p(2, 4);
  const GridModel model(g, p);
  const auto eq = oracle::Enumerator(g, p).find_equilibrium(1e-10);
  if (!eq) return {false, "no equilibrium found"};
  const MinorPolicy deviation = minor_best_response(model, *eq).policy;
  const std::vector<int> ns{50, 200, 800};
  std::vector<DeviationGain> gains;
  for (int n : ns) {
    SimConfig cfg;
    cfg.n_players = n;
    cfg.episodes = 40000;
    cfg.seed = 11;
    gains.push_back(deviation_gain(model, *eq, deviation, cfg));
  }
  // Least-squares fit of gain = C / sqrt(N).
  double num_c = 0.0, den_c = 0.0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    num_c += gains[k].gain / std::sqrt(ns[k]);
    den_c += 1.0 / ns[k];
  }
  const double c = num_c / den_c;
  const bool decreasing = gains[0].gain > gains[1].gain && gains[1].gain > gains[2].gain;
  const bool bounded = gains[2].gain <= gains[2].ci + 2.0 * c / std::sqrt(800.0);
  std::string detail;
  for (std::size_t k = 0; k < ns.size(); ++k)
    detail += "N=" + std::to_string(ns[k]) + " " + num(gains[k].gain) + "+-" + num(gains[k].ci) + " ";
  return {decreasing && bounded, detail + "C=" + num(c) + ", " + num(seconds_since(start)) + " s"};
}

// 8. Discounted objectives: value iteration converges and fictitious play
// still reduces exploitability.
Outcome discounted_mode() {
  const GameSpec sis = build_env("sis", {}, 0.95);
  const SimplexPartition p60(2, 60);
  const GridModel model(sis, p60);
  double residual = INFINITY;
  std::size_t iterations = 0;
  try {
    const auto pair = uniform_policy(sis, p60);
    const auto br = minor_best_response(model, pair);
    const auto mbr = major_best_response(model, pair);
    residual = std::max(br.stats.residual, mbr.stats.residual);
    iterations = std::max(br.stats.iterations, mbr.stats.iterations);
  } catch (const NumericError& e) {
    return {false, std::string("value iteration failed: ") + e.what()};
  }
  const bool vi_ok = residual < 1e-5 && iterations < DpOptions{}.max_iterations;

  const GameSpec tiny = build_env("tiny", {}, 0.9);
  const SimplexPartition p4(2, 4);
  SolveOptions opts;
  opts.iterations = 200;
  const auto e = totals(fictitious_play(GridModel(tiny, p4), first_action_policy(tiny, p4), opts));
  const bool fp_ok = e.back() <= 0.1 * e[1];
  return {vi_ok && fp_ok, "sis residual " + num(residual) + " after " + std::to_string(iterations) +
                              " sweeps; tiny fp " + num(e[1]) + " -> " + num(e.back())};
}

// 9. Every command reproduces its artifacts byte for byte.
Outcome determinism(const fs::path& work) {
  const std::vector<std::vector<std::string>> commands{
      {"solve", "--env", "tiny", "--bins", "4", "--iters", "30", "--seed", "5"},
      {"solve", "--env", "sis", "--bins", "30", "--iters", "10", "--solver", "fpi", "--param", "T=40"},
      {"solve", "--env", "tiny", "--bins", "6", "--iters", "20", "--gamma", "0.9", "--eval-stride", "5"},
      {"sweep-bins", "--env", "sis", "--bins-list", "10,20", "--policy", "uniform", "--param", "T=30"},
      {"sweep-agents", "--env", "tiny", "--bins", "4", "--iters", "10", "--agents", "5,40", "--episodes", "200",
       "--seed", "3"},
      {"sweep-agents", "--env", "buffet", "--bins", "8", "--policy", "uniform", "--agents", "6", "--episodes", "50",
       "--seed", "1", "--param", "T=12"},
      {"trajectory", "--env", "advert", "--bins", "20", "--iters", "5", "--seed", "4", "--param", "T=25"},
      {"validate-env", "--env", "buffet", "--bins", "15"},
  };
  std::size_t compared = 0;
  std::vector<std::string> mismatches;
  auto slurp = [](const fs::path& f) {
    std::ifstream is(f, std::ios::binary);
    std::stringstream s;
    s << is.rdbuf();
    return s.str();
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const fs::path dir = work / ("cmd" + std::to_string(i));
    std::vector<std::string> args = commands[i];
    args.push_back("--out");
    args.push_back(dir.string());
    std::vector<std::pair<std::string, std::string>> first;
    for (int run = 0; run < 2; ++run) {
      fs::remove_all(dir);
      std::ostringstream out, err;
      const int code = run_cli(args, out, err);
      if (code != kExitOk) return {false, commands[i][0] + " exited with " + std::to_string(code) + ": " + err.str()};
      if (run == 0) {
        for (const auto& entry : fs::directory_iterator(dir))
          first.emplace_back(entry.path().filename().string(), slurp(entry.path()));
        continue;
      }
      for (const auto& [name, bytes] : first) {
        ++compared;
        if (!fs::exists(dir / name) || slurp(dir / name) != bytes) mismatches.push_back(name);
      }
    }
  }
  return {mismatches.empty() && compared > 0,
          std::to_string(compared) + " artifacts compared, " + std::to_string(mismatches.size()) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "m3fg_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string item; std::getline(ss, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--work-dir DIR] [--only N[,N...]]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel validity on the grid", kernel_validity},
      {"dynamic programming matches enumeration", oracle_equivalence},
      {"fictitious play on buffet", buffet_fictitious_play},
      {"fixed-point iteration oscillates", fixed_point_oscillation},
      {"discretization convergence", discretization_convergence},
      {"propagation of chaos", propagation_of_chaos},
      {"approximate Nash in the N-player game", approximate_nash},
      {"discounted objective", discounted_mode},
      {"deterministic artifacts", [&] { return determinism(work); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << "): " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
