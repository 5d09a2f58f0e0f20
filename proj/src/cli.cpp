#include "m3fg/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "m3fg/dp.hpp"
#include "m3fg/dynamics.hpp"
#include "m3fg/envs.hpp"
#include "m3fg/equilibrium.hpp"
#include "m3fg/errors.hpp"
#include "m3fg/model.hpp"
#include "m3fg/partition.hpp"
#include "m3fg/policy_io.hpp"
#include "m3fg/simulator.hpp"

namespace fs = std::filesystem;

namespace m3fg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& text, long long lo, long long hi) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  }
  if (v < lo || v > hi) throw ConfigError("value for " + key + " out of range: " + text);
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) throw ConfigError("invalid value for seed: '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  }
  return v;
}

std::vector<int> parse_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(parse_int(key, trim(item), 1, 100000000)));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid value for " + key + ": '" + text + "'");
}

// ---------------------------------------------------------------------------
// Shared plumbing for the commands.

GameSpec make_spec(const ExperimentConfig& cfg) { return build_env(cfg.env, cfg.env_params, cfg.gamma); }

GridModel make_model(const ExperimentConfig& cfg, int bins) {
  GameSpec spec = make_spec(cfg);
  SimplexPartition part(spec.minor_states, bins);
  return GridModel(std::move(spec), std::move(part));
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (fs::path(cfg.out) / name).string());
  return os;
}

void write_resolved(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["env"] = cfg.env;
  j["solver"] = cfg.solver;
  j["bins"] = cfg.bins;
  j["iters"] = cfg.iters;
  j["gamma"] = cfg.gamma ? nlohmann::json(*cfg.gamma) : nlohmann::json(nullptr);
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["eval_stride"] = cfg.eval_stride;
  j["episodes"] = cfg.episodes;
  j["agents"] = cfg.agents;
  j["bins_list"] = cfg.bins_list;
  j["policy_in"] = cfg.policy_in;
  j["policy"] = cfg.policy;
  j["init"] = cfg.init;
  j["horizon_steps"] = cfg.horizon_steps ? nlohmann::json(*cfg.horizon_steps) : nlohmann::json(nullptr);
  j["slice_t"] = cfg.slice_t;
  j["timing"] = cfg.timing;
  j["threads"] = cfg.threads;
  for (const auto& [name, value] : env_parameters(cfg.env, cfg.env_params)) {
    auto& slot = j["env." + cfg.env + "." + name];
    if (value == std::floor(value) && std::abs(value) < 1e15) slot = static_cast<long long>(value);
    else slot = value;
  }
  auto os = open_output(cfg, "config_resolved.json");
  os << j.dump(2) << "\n";
}

SolveReport run_solver(const ExperimentConfig& cfg, const GridModel& model) {
  PolicyPair init = cfg.init == "uniform" ? uniform_policy(model.spec(), model.partition())
                                          : first_action_policy(model.spec(), model.partition());
  SolveOptions opts;
  opts.iterations = cfg.iters;
  opts.eval_stride = cfg.eval_stride;
  return cfg.solver == "fpi" ? fixed_point_iteration(model, std::move(init), opts)
                             : fictitious_play(model, std::move(init), opts);
}

PolicyPair obtain_policy(const ExperimentConfig& cfg, const GridModel& model) {
  if (!cfg.policy_in.empty()) {
    std::ifstream is(cfg.policy_in, std::ios::binary);
    if (!is) throw ConfigError("cannot read policy_in: " + cfg.policy_in);
    PolicyDocument doc = read_policy(is);
    if (doc.env != cfg.env) throw ConfigError("policy_in was computed for env '" + doc.env + "'");
    if (doc.bins != model.partition().bins()) throw ConfigError("policy_in was computed with a different bins value");
    check_policy(model.spec(), model.partition(), doc.policy);
    return std::move(doc.policy);
  }
  if (cfg.policy == "uniform") return uniform_policy(model.spec(), model.partition());
  if (cfg.policy == "first") return first_action_policy(model.spec(), model.partition());
  return run_solver(cfg, model).policy;
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const GridModel model = make_model(cfg, cfg.bins);
  const SolveReport report = run_solver(cfg, model);

  auto csv = open_output(cfg, "exploitability.csv");
  csv << "iteration,minor_exploitability,major_exploitability,total_exploitability,wall_seconds\n";
  for (const auto& rec : report.history) {
    csv << rec.iteration << ',' << format_double(rec.exploitability.minor) << ','
        << format_double(rec.exploitability.major) << ',' << format_double(rec.exploitability.total) << ','
        << format_double(cfg.timing ? rec.wall_seconds : 0.0) << '\n';
  }
  auto pol = open_output(cfg, "policy.json");
  write_policy(pol, PolicyDocument{cfg.env, cfg.bins, model.spec().horizon, report.policy});

  const auto& last = report.history.back().exploitability;
  out << report.solver << " on " << cfg.env << " (bins=" << cfg.bins << ", iters=" << cfg.iters
      << "): final exploitability minor=" << format_double(last.minor) << " major=" << format_double(last.major)
      << " total=" << format_double(last.total) << "\n";
  return kExitOk;
}

int cmd_sweep_bins(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.bins_list.empty()) throw ConfigError("missing key: bins_list");
  if (!cfg.policy_in.empty()) throw ConfigError("policy_in cannot be used with sweep-bins (policies are per grid)");
  write_resolved(cfg);
  auto csv = open_output(cfg, "sweep_bins.csv");
  csv << "bins,J_minor,J_major,E_minor,E_major\n";
  for (int bins : cfg.bins_list) {
    const GridModel model = make_model(cfg, bins);
    const PolicyPair pair = obtain_policy(cfg, model);
    const Objectives j = evaluate(model, pair, kExploitabilityOptions);
    const Exploitability e = exploitability(model, pair);
    csv << bins << ',' << format_double(j.minor) << ',' << format_double(j.major) << ',' << format_double(e.minor)
        << ',' << format_double(e.major) << '\n';
    out << "bins=" << bins << " J=" << format_double(j.minor) << " J0=" << format_double(j.major) << "\n";
  }
  return kExitOk;
}

int cmd_sweep_agents(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.agents.empty()) throw ConfigError("missing key: agents");
  write_resolved(cfg);
  const GridModel model = make_model(cfg, cfg.bins);
  const PolicyPair pair = obtain_policy(cfg, model);
  const Objectives dp = evaluate(model, pair, kExploitabilityOptions);

  auto csv = open_output(cfg, "sweep_agents.csv");
  csv << "n_players,J_minor_mc,J_minor_ci,J_major_mc,J_major_ci,J_minor_dp,J_major_dp\n";
  for (int n : cfg.agents) {
    SimConfig sc;
    sc.n_players = n;
    sc.episodes = cfg.episodes;
    sc.seed = cfg.seed;
    sc.horizon_steps = cfg.horizon_steps;
    sc.threads = cfg.threads;
    const SimResult r = simulate(model, pair, sc);
    csv << n << ',' << format_double(r.minor_mean) << ',' << format_double(r.minor_ci) << ','
        << format_double(r.major_mean) << ',' << format_double(r.major_ci) << ',' << format_double(dp.minor) << ','
        << format_double(dp.major) << '\n';
    out << "N=" << n << " J_minor=" << format_double(r.minor_mean) << " +- " << format_double(r.minor_ci)
        << " (dp " << format_double(dp.minor) << ")\n";
  }
  return kExitOk;
}

int cmd_trajectory(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const GridModel model = make_model(cfg, cfg.bins);
  const PolicyPair pair = obtain_policy(cfg, model);
  int steps = 0;
  if (cfg.horizon_steps) {
    steps = *cfg.horizon_steps;
  } else if (const auto* f = std::get_if<FiniteHorizon>(&model.spec().horizon)) {
    steps = f->steps;
  } else {
    throw ConfigError("missing key: horizon_steps (required for discounted trajectories)");
  }
  if (!is_discounted(model.spec().horizon) && steps > model.slices()) {
    throw ConfigError("horizon_steps exceeds the policy horizon");
  }
  if (cfg.slice_t < 0 || cfg.slice_t >= model.slices()) throw ConfigError("slice_t out of range");

  const MeanFieldFlow flow(model, pair.minor);
  const auto& part = model.partition();
  const int nx = model.minor_states();
  std::mt19937_64 rng(stream_seed(cfg.seed, 0, kMajorStream));
  auto draw = [&](std::span<const double> p) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double cum = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0.0) continue;
      cum += p[i];
      last = static_cast<int>(i);
      if (u < cum) break;
    }
    return last;
  };

  auto csv = open_output(cfg, "trajectory.csv");
  csv << "t,x0,u0,mf_cell";
  for (int k = 0; k < nx; ++k) csv << ",mf_" << k;
  csv << '\n';
  int x0 = draw(model.spec().mu0_major);
  std::size_t cell = model.initial_cell();
  auto write_mf = [&](std::size_t c) {
    for (double w : part.representative(c).weights()) csv << ',' << format_double(w);
    csv << '\n';
  };
  for (int t = 0; t < steps; ++t) {
    const int u0 = draw(pair.major.row(slice_at(pair.major, t), x0, cell));
    csv << t << ',' << x0 << ',' << u0 << ',' << cell;
    write_mf(cell);
    const std::size_t next_cell = flow.next(t, x0, u0, cell);
    x0 = draw(model.major_kernel(x0, u0, cell));
    cell = next_cell;
  }
  csv << steps << ',' << x0 << ",," << cell;
  write_mf(cell);

  auto slice = open_output(cfg, "policy_slice.csv");
  slice << "t,x,x0,cell";
  for (int k = 0; k < nx; ++k) slice << ",mf_" << k;
  for (int u = 0; u < model.minor_actions(); ++u) slice << ",p_" << u;
  slice << '\n';
  const std::size_t s = slice_at(pair.minor, cfg.slice_t);
  for (int x = 0; x < nx; ++x)
    for (int xm = 0; xm < model.major_states(); ++xm)
      for (std::size_t c = 0; c < model.cells(); ++c) {
        slice << cfg.slice_t << ',' << x << ',' << xm << ',' << c;
        for (double w : part.representative(c).weights()) slice << ',' << format_double(w);
        for (double p : pair.minor.row(s, x, xm, c)) slice << ',' << format_double(p);
        slice << '\n';
      }
  out << "wrote " << steps + 1 << " trajectory rows\n";
  return kExitOk;
}

int cmd_validate_env(const ExperimentConfig& cfg, std::ostream& out) {
  write_resolved(cfg);
  const GameSpec spec = make_spec(cfg);
  const SimplexPartition part(spec.minor_states, cfg.bins);
  const auto violations = validate(spec, part);
  nlohmann::json j;
  j["env"] = cfg.env;
  j["bins"] = cfg.bins;
  j["violations"] = violations;
  auto os = open_output(cfg, "validation.json");
  os << j.dump(2) << "\n";
  for (const auto& v : violations) out << v << "\n";
  out << cfg.env << ": " << violations.size() << " violation(s) at bins=" << cfg.bins << "\n";
  return violations.empty() ? kExitOk : kExitNumeric;
}

const std::vector<std::string>& plain_keys() {
  static const std::vector<std::string> keys{"env",      "solver",    "bins",      "iters",         "gamma",
                                             "seed",     "out",       "eval_stride", "episodes",    "agents",
                                             "bins_list", "policy_in", "policy",    "init",          "horizon_steps",
                                             "slice_t",  "timing",    "threads"};
  return keys;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ExperimentConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& settings) {
  ExperimentConfig cfg;
  cfg.command = command;
  const auto& known = plain_keys();
  const auto ids = env_ids();
  for (const auto& [key, value] : settings) {
    if (key.rfind("env.", 0) == 0) {
      const auto dot = key.find('.', 4);
      const std::string id = dot == std::string::npos ? "" : key.substr(4, dot - 4);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ConfigError("unknown key: " + key);
      continue;
    }
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown key: " + key);
  }

  auto get = [&](const std::string& key) -> const std::string* {
    auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };

  const std::string* env = get("env");
  if (!env || env->empty()) throw ConfigError("missing key: env");
  if (std::find(ids.begin(), ids.end(), *env) == ids.end()) throw ConfigError("invalid value for env: '" + *env + "'");
  cfg.env = *env;
  const std::string prefix = "env." + cfg.env + ".";
  for (const auto& [key, value] : settings) {
    if (key.rfind(prefix, 0) == 0) cfg.env_params[key.substr(prefix.size())] = value;
  }
  env_parameters(cfg.env, cfg.env_params);  // rejects unknown parameter names

  if (auto* v = get("solver")) {
    if (*v != "fp" && *v != "fpi") throw ConfigError("invalid value for solver: '" + *v + "'");
    cfg.solver = *v;
  }
  if (auto* v = get("bins")) cfg.bins = static_cast<int>(parse_int("bins", *v, 1, 1000000));
  if (auto* v = get("iters")) cfg.iters = static_cast<int>(parse_int("iters", *v, 1, 100000000));
  if (auto* v = get("gamma")) {
    const double g = parse_real("gamma", *v);
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("invalid value for gamma: must lie in (0,1)");
    cfg.gamma = g;
  }
  if (auto* v = get("seed")) cfg.seed = parse_seed(*v);
  if (auto* v = get("out")) cfg.out = *v;
  if (auto* v = get("eval_stride")) cfg.eval_stride = static_cast<int>(parse_int("eval_stride", *v, 1, 100000000));
  cfg.episodes = cfg.env == "buffet" ? 5000 : 1000;
  if (auto* v = get("episodes")) cfg.episodes = static_cast<int>(parse_int("episodes", *v, 1, 100000000));
  if (auto* v = get("agents")) cfg.agents = parse_list("agents", *v);
  if (auto* v = get("bins_list")) cfg.bins_list = parse_list("bins_list", *v);
  if (auto* v = get("policy_in")) cfg.policy_in = *v;
  if (auto* v = get("policy")) {
    if (!v->empty() && *v != "uniform" && *v != "first") throw ConfigError("invalid value for policy: '" + *v + "'");
    cfg.policy = *v;
  }
  if (auto* v = get("init")) {
    if (*v != "uniform" && *v != "first") throw ConfigError("invalid value for init: '" + *v + "'");
    cfg.init = *v;
  }
  if (auto* v = get("horizon_steps")) {
    cfg.horizon_steps = static_cast<int>(parse_int("horizon_steps", *v, 1, 100000000));
  }
  if (auto* v = get("slice_t")) cfg.slice_t = static_cast<int>(parse_int("slice_t", *v, 0, 100000000));
  if (auto* v = get("timing")) cfg.timing = parse_bool("timing", *v);
  if (auto* v = get("threads")) cfg.threads = static_cast<int>(parse_int("threads", *v, 0, 4096));
  return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Major-minor mean-field game solver and experiment runner", "m3fg"};
  app.require_subcommand(1);

  struct Flag {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const std::vector<Flag> flags{
      {"--env", "env", "environment: sis | buffet | advert | tiny"},
      {"--solver", "solver", "fp | fpi"},
      {"--bins", "bins", "grid subdivisions per dimension"},
      {"--iters", "iters", "solver iterations"},
      {"--episodes", "episodes", "Monte-Carlo episodes"},
      {"--agents", "agents", "comma list of player counts"},
      {"--bins-list", "bins_list", "comma list of bins values"},
      {"--gamma", "gamma", "discount factor (switches to the discounted objective)"},
      {"--seed", "seed", "random seed"},
      {"--out", "out", "output directory"},
      {"--eval-stride", "eval_stride", "iterations between exploitability evaluations"},
      {"--policy-in", "policy_in", "policy.json to use instead of solving"},
      {"--policy", "policy", "fixed policy instead of solving: uniform | first"},
      {"--init", "init", "solver initial policy: first | uniform"},
      {"--horizon-steps", "horizon_steps", "simulation / trajectory length"},
      {"--slice-t", "slice_t", "time step dumped to policy_slice.csv"},
      {"--threads", "threads", "simulation worker threads (0 = hardware)"},
  };

  struct Parsed {
    std::map<std::string, std::string> values;
    std::string config_file;
    std::vector<std::string> params;
    bool timing = false;
  };
  std::map<std::string, Parsed> parsed;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "run fictitious play or fixed-point iteration"},
      {"sweep-bins", "evaluate objectives over a list of grid sizes"},
      {"sweep-agents", "compare N-player simulation against the mean-field prediction"},
      {"trajectory", "roll out the projected mean field along a sampled major path"},
      {"validate-env", "check kernels and initial distributions on the grid"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    Parsed& p = parsed[name];
    for (const auto& f : flags) sub->add_option(f.flag, p.values[f.key], f.help);
    sub->add_option("--config", p.config_file, "flat key = value config file");
    sub->add_option("--param", p.params, "environment override env.<name>.<param>=value or <param>=value");
    sub->add_flag("--timing", p.timing, "record wall-clock seconds in exploitability.csv");
    subs[name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    std::string command;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) command = name;
    Parsed& p = parsed[command];
    CLI::App* sub = subs[command];

    std::map<std::string, std::string> settings;
    if (!p.config_file.empty()) {
      std::ifstream is(p.config_file);
      if (!is) throw ConfigError("cannot read config file: " + p.config_file);
      std::stringstream buf;
      buf << is.rdbuf();
      settings = parse_config_text(buf.str());
    }
    for (const auto& f : flags) {
      if (sub->get_option(f.flag)->count() > 0) settings[f.key] = p.values[f.key];
    }
    if (p.timing) settings["timing"] = "true";
    for (const auto& kv : p.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
      std::string key = trim(kv.substr(0, eq));
      if (key.rfind("env.", 0) != 0) {
        auto env = settings.find("env");
        if (env == settings.end()) throw ConfigError("missing key: env");
        key = "env." + env->second + "." + key;
      }
      settings[key] = trim(kv.substr(eq + 1));
    }

    const ExperimentConfig cfg = resolve_config(command, settings);
    if (command == "solve") return cmd_solve(cfg, out);
    if (command == "sweep-bins") return cmd_sweep_bins(cfg, out);
    if (command == "sweep-agents") return cmd_sweep_agents(cfg, out);
    if (command == "trajectory") return cmd_trajectory(cfg, out);
    return cmd_validate_env(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace m3fg
