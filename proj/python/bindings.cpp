#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "m3fg/cli.hpp"
#include "m3fg/dp.hpp"
#include "m3fg/envs.hpp"
#include "m3fg/equilibrium.hpp"
#include "m3fg/errors.hpp"
#include "m3fg/model.hpp"
#include "m3fg/policy_io.hpp"
#include "m3fg/simulator.hpp"

namespace py = pybind11;
using namespace m3fg;

namespace {

template <std::size_t R, class Tag>
py::array_t<double> to_array(const Tensor<R, Tag>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

template <std::size_t R, class Tag>
void from_array(Tensor<R, Tag>& t, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (static_cast<std::size_t>(a.ndim()) != R) throw ConfigError("policy array has the wrong rank");
  for (std::size_t k = 0; k < R; ++k)
    if (static_cast<std::size_t>(a.shape(k)) != t.extent(k)) throw ConfigError("policy array has the wrong shape");
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
}

std::map<std::string, std::string> stringify(const std::map<std::string, py::object>& params) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : params) out[k] = py::str(v).cast<std::string>();
  return out;
}

GridModel make_model(const std::string& env, int bins, const std::map<std::string, py::object>& params,
                     std::optional<double> gamma) {
  GameSpec spec = build_env(env, stringify(params), gamma);
  SimplexPartition part(spec.minor_states, bins);
  return GridModel(std::move(spec), std::move(part));
}

// An environment tabulated on a grid, the unit every Python call works with.
class Game {
 public:
  Game(const std::string& env, int bins, const std::map<std::string, py::object>& params, std::optional<double> gamma)
      : env_(env), bins_(bins), model_(make_model(env, bins, params, gamma)) {}

  const GridModel& model() const { return model_; }
  const std::string& env() const { return env_; }
  int bins() const { return bins_; }

  PolicyPair checked(const PolicyPair& p) const {
    check_policy(model_.spec(), model_.partition(), p);
    return p;
  }

 private:
  std::string env_;
  int bins_;
  GridModel model_;
};

py::dict exploitability_dict(const Exploitability& e) {
  py::dict d;
  d["minor"] = e.minor;
  d["major"] = e.major;
  d["total"] = e.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Major-minor mean-field game solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("env_ids", &env_ids);

  py::class_<SimplexPartition>(m, "Partition")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("bins"))
      .def_property_readonly("dim", &SimplexPartition::dim)
      .def_property_readonly("bins", &SimplexPartition::bins)
      .def("cell_count", &SimplexPartition::cell_count)
      .def("representative",
           [](const SimplexPartition& p, std::size_t c) {
             const MeanField mu = p.representative(c);
             return std::vector<double>(mu.weights().begin(), mu.weights().end());
           })
      .def("composition",
           [](const SimplexPartition& p, std::size_t c) {
             const auto k = p.composition(c);
             return std::vector<int>(k.begin(), k.end());
           })
      .def("project", [](const SimplexPartition& p, const std::vector<double>& mu) { return p.project(mu); });

  py::class_<PolicyPair>(m, "Policy")
      .def_property(
          "minor", [](const PolicyPair& p) { return to_array(p.minor); },
          [](PolicyPair& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
            from_array(p.minor, a);
          },
          "minor[t][x][x0][cell][u]")
      .def_property(
          "major", [](const PolicyPair& p) { return to_array(p.major); },
          [](PolicyPair& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
            from_array(p.major, a);
          },
          "major[t][x0][cell][u0]")
      .def("__eq__", [](const PolicyPair& a, const PolicyPair& b) { return a == b; });

  py::class_<Game>(m, "Game")
      .def(py::init<const std::string&, int, const std::map<std::string, py::object>&, std::optional<double>>(),
           py::arg("env"), py::arg("bins"), py::arg("params") = std::map<std::string, py::object>{},
           py::arg("gamma") = py::none())
      .def_property_readonly("env", &Game::env)
      .def_property_readonly("bins", &Game::bins)
      .def_property_readonly("cells", [](const Game& g) { return g.model().cells(); })
      .def_property_readonly("initial_cell", [](const Game& g) { return g.model().initial_cell(); })
      .def("validate", [](const Game& g) { return validate(g.model().spec(), g.model().partition()); })
      .def("uniform_policy", [](const Game& g) { return uniform_policy(g.model().spec(), g.model().partition()); })
      .def("first_action_policy",
           [](const Game& g) { return first_action_policy(g.model().spec(), g.model().partition()); })
      .def(
          "solve",
          [](const Game& g, int iters, const std::string& solver, int eval_stride, std::optional<PolicyPair> init) {
            SolveOptions opts;
            opts.iterations = iters;
            opts.eval_stride = eval_stride;
            PolicyPair start =
                init ? g.checked(*init) : first_action_policy(g.model().spec(), g.model().partition());
            SolveReport rep;
            {
              py::gil_scoped_release release;
              if (solver == "fp") {
                rep = fictitious_play(g.model(), std::move(start), opts);
              } else if (solver == "fpi") {
                rep = fixed_point_iteration(g.model(), std::move(start), opts);
              } else {
                throw ConfigError("solver must be fp or fpi");
              }
            }
            py::list history;
            for (const auto& h : rep.history) {
              py::dict d = exploitability_dict(h.exploitability);
              d["iteration"] = h.iteration;
              history.append(d);
            }
            return py::make_tuple(rep.policy, history);
          },
          py::arg("iters") = 100, py::arg("solver") = "fp", py::arg("eval_stride") = 1, py::arg("init") = py::none(),
          "Returns (policy, history) where history lists exploitability per recorded iteration.")
      .def(
          "evaluate",
          [](const Game& g, const PolicyPair& p) {
            const Objectives j = evaluate(g.model(), g.checked(p));
            return py::make_tuple(j.minor, j.major);
          },
          "Mean-field objectives (minor, major).")
      .def("exploitability",
           [](const Game& g, const PolicyPair& p) {
             return exploitability_dict(exploitability(g.model(), g.checked(p)));
           })
      .def("best_response",
           [](const Game& g, const PolicyPair& p) {
             const PolicyPair q = g.checked(p);
             return PolicyPair{minor_best_response(g.model(), q).policy, major_best_response(g.model(), q).policy};
           })
      .def(
          "simulate",
          [](const Game& g, const PolicyPair& p, int n_players, int episodes, std::uint64_t seed,
             std::optional<int> horizon_steps) {
            SimConfig cfg;
            cfg.n_players = n_players;
            cfg.episodes = episodes;
            cfg.seed = seed;
            cfg.horizon_steps = horizon_steps;
            const PolicyPair q = g.checked(p);
            SimResult r;
            {
              py::gil_scoped_release release;
              r = simulate(g.model(), q, cfg);
            }
            py::dict d;
            d["minor_mean"] = r.minor_mean;
            d["minor_ci"] = r.minor_ci;
            d["major_mean"] = r.major_mean;
            d["major_ci"] = r.major_ci;
            return d;
          },
          py::arg("policy"), py::arg("n_players"), py::arg("episodes") = 1000, py::arg("seed") = 0,
          py::arg("horizon_steps") = py::none())
      .def(
          "deviation_gain",
          [](const Game& g, const PolicyPair& p, const PolicyPair& deviation, int n_players, int episodes,
             std::uint64_t seed) {
            SimConfig cfg;
            cfg.n_players = n_players;
            cfg.episodes = episodes;
            cfg.seed = seed;
            const DeviationGain r = deviation_gain(g.model(), g.checked(p), g.checked(deviation).minor, cfg);
            return py::make_tuple(r.gain, r.ci);
          },
          py::arg("policy"), py::arg("deviation"), py::arg("n_players"), py::arg("episodes") = 1000,
          py::arg("seed") = 0, "Gain of player 0 switching to deviation.minor, with its confidence half-width.")
      .def(
          "save_policy",
          [](const Game& g, const PolicyPair& p, const std::string& path) {
            std::ofstream os(path, std::ios::binary);
            if (!os) throw ConfigError("cannot write " + path);
            write_policy(os, {g.env(), g.bins(), g.model().spec().horizon, g.checked(p)});
          },
          py::arg("policy"), py::arg("path"));

  m.def(
      "load_policy",
      [](const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw ConfigError("cannot read " + path);
        PolicyDocument doc = read_policy(is);
        return py::make_tuple(doc.env, doc.bins, doc.policy);
      },
      py::arg("path"), "Returns (env, bins, policy).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command-line invocation; returns (exit_code, stdout, stderr).");
}
