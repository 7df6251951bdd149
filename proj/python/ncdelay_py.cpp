// Python bindings: bounds, oracles, single trials and whole experiments.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "ncdelay/bounds.hpp"
#include "ncdelay/config.hpp"
#include "ncdelay/gf2.hpp"
#include "ncdelay/harness.hpp"
#include "ncdelay/oracles.hpp"
#include "ncdelay/simnet.hpp"
#include "ncdelay/stats.hpp"

namespace py = pybind11;
using namespace ncdelay;

namespace {

gf2::BitMatrix matrix_from_rows(const std::vector<std::string>& rows) {
  if (rows.empty()) return {};
  gf2::BitMatrix m(0, rows.front().size());
  for (const auto& r : rows) {
    if (r.size() != m.cols()) throw std::invalid_argument("rows must share a length");
    m.append_row(gf2::BitVector::from_string(r));
  }
  return m;
}

bounds::BoundQuery make_query(const std::string& regime, double k, double L, double q, double epsilon, double p,
                              std::optional<double> gamma_e, double gamma_a, double gamma_b, double gamma_c,
                              double implied_constant) {
  bounds::BoundQuery b;
  b.regime = bounds::parse_regime(regime);
  b.k = k;
  b.L = L;
  b.q = q;
  b.epsilon = epsilon;
  b.p = p;
  b.gamma_e = gamma_e;
  b.gamma_a = gamma_a;
  b.gamma_b = gamma_b;
  b.gamma_c = gamma_c;
  b.implied_constant = implied_constant;
  return b;
}

py::dict trial_dict(const sim::TrialResult& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["coding_delay"] = r.coding_delay;
  d["censored"] = r.censored();
  d["horizon_cap"] = r.horizon_cap;
  d["chunk_decode_time"] = r.chunk_decode_time;
  d["packets_sent"] = r.packets_sent;
  d["packets_successful"] = r.packets_successful;
  d["empty_chunk_events"] = r.empty_chunk_events;
  d["sink_rank"] = r.sink_rank;
  return d;
}

}  // namespace

PYBIND11_MODULE(ncdelay, m) {
  m.doc() = "Coding delay of dense and chunked network codes over line networks";

  py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("rank", [](const std::vector<std::string>& rows) { return gf2::rank(matrix_from_rows(rows)); },
        py::arg("rows"), "GF(2) rank of a matrix given as '0'/'1' row strings.");

  m.def("regimes", [] {
    std::vector<std::string> out;
    for (auto r : bounds::all_regimes()) out.emplace_back(bounds::to_string(r));
    return out;
  });

  m.def(
      "bound",
      [](const std::string& regime, double k, double L, double q, double epsilon, double p,
         std::optional<double> gamma_e, double gamma_a, double gamma_b, double gamma_c, double implied_constant) {
        const auto v = bounds::evaluate(
            make_query(regime, k, L, q, epsilon, p, gamma_e, gamma_a, gamma_b, gamma_c, implied_constant));
        py::dict d;
        d["value"] = v.value;
        d["w"] = v.w_used;
        d["constraints_ok"] = v.constraints_ok;
        d["violations"] = v.violations;
        d["asymptotic_note"] = v.asymptotic_note;
        return d;
      },
      py::arg("regime"), py::arg("k"), py::arg("L"), py::arg("q") = 1.0, py::arg("epsilon") = 0.05,
      py::arg("p") = 1.0, py::arg("gamma_e") = py::none(), py::arg("gamma_a") = 0.25, py::arg("gamma_b") = 0.08,
      py::arg("gamma_c") = 0.2, py::arg("implied_constant") = 1.0);

  m.def(
      "partition_plan",
      [](const std::string& regime, double k, double L, double q, double epsilon, double p) {
        const auto plan =
            bounds::partition_plan(make_query(regime, k, L, q, epsilon, p, std::nullopt, 0.25, 0.08, 0.2, 1.0));
        py::dict d;
        d["w"] = plan.w;
        d["w_T"] = plan.w_T;
        d["phi"] = plan.phi;
        d["gamma_star"] = plan.gamma_star;
        d["r"] = plan.r;
        d["vacuous"] = plan.vacuous;
        return d;
      },
      py::arg("regime"), py::arg("k"), py::arg("L"), py::arg("q") = 1.0, py::arg("epsilon") = 0.05,
      py::arg("p") = 1.0);

  m.def(
      "gamma_star",
      [](double phi, double w_T, double epsilon) {
        const auto s = bounds::gamma_star(phi, w_T, epsilon);
        return py::make_tuple(s.gamma_star, s.r, s.vacuous);
      },
      py::arg("phi"), py::arg("w_T"), py::arg("epsilon"));

  m.def(
      "exact_rank_tail",
      [](std::size_t n, std::size_t k) {
        const auto r = oracles::exact_rank_tail(n, k);
        return py::make_tuple(r.num, r.den);
      },
      py::arg("n"), py::arg("k"));
  m.def("closed_form_rank_tail", &oracles::closed_form_rank_tail, py::arg("n"), py::arg("k"));
  m.def(
      "mc_rank_tail",
      [](std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed) {
        Rng rng(seed);
        const auto e = oracles::mc_rank_tail(n, k, trials, rng);
        return py::make_tuple(e.fraction, e.ci.lo, e.ci.hi);
      },
      py::arg("n"), py::arg("k"), py::arg("trials"), py::arg("seed") = 1);

  m.def(
      "rblt_tail_bound",
      [](std::size_t w_star, std::size_t r_star, std::vector<std::size_t> r_l, const std::string& orientation,
         std::size_t gamma) {
        oracles::RbltParams p;
        p.w_star = w_star;
        p.r_star = r_star;
        p.r_l = std::move(r_l);
        if (orientation == "vertical") {
          p.orientation = oracles::Orientation::vertical;
        } else if (orientation == "horizontal") {
          p.orientation = oracles::Orientation::horizontal;
        } else {
          throw std::invalid_argument("orientation must be 'vertical' or 'horizontal'");
        }
        const auto b = oracles::rblt_tail_bound(p, gamma);
        py::dict d;
        d["n_star"] = b.n_star;
        d["u_star"] = b.u_star;
        d["value"] = b.value;
        d["vacuous"] = b.vacuous;
        return d;
      },
      py::arg("w_star"), py::arg("r_star"), py::arg("r_l"), py::arg("orientation") = "vertical", py::arg("gamma") = 0);

  m.def(
      "wilson",
      [](std::size_t successes, std::size_t n, double confidence) {
        const auto ci = stats::wilson(successes, n, confidence);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("successes"), py::arg("n"), py::arg("confidence") = 0.95);

  m.def(
      "run_trial",
      [](std::size_t k, std::vector<double> p, std::size_t q, std::uint64_t seed, std::vector<double> lambda,
         std::optional<double> horizon_cap, bool strictly_later) {
        sim::NetworkConfig n;
        n.code = q == 1 ? codec::CodeConfig::dense(k) : codec::CodeConfig::chunked(k, q);
        n.traffic = lambda.empty() ? traffic::TrafficSpec::regular(std::move(p))
                                   : traffic::TrafficSpec::poisson(std::move(lambda), std::move(p));
        n.horizon_cap = horizon_cap;
        if (strictly_later) n.order = sim::SameInstantOrder::strictly_later;
        sim::TrialResult r;
        {
          py::gil_scoped_release release;
          r = sim::run_trial(n, seed);
        }
        return trial_dict(r);
      },
      py::arg("k"), py::arg("p"), py::arg("q") = 1, py::arg("seed") = 1, py::arg("lam") = std::vector<double>{},
      py::arg("horizon_cap") = py::none(), py::arg("strictly_later") = false,
      "One coding-delay trial on regular (or Poisson, when lam is given) traffic.");

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::string& format, std::size_t workers) {
        const auto cfg = harness::experiment_from_config(config::ConfigMap::parse(config_text));
        harness::ExperimentSummary s;
        {
          py::gil_scoped_release release;
          s = harness::run_experiment(cfg, workers);
        }
        return harness::parse_format(format) == harness::OutputFormat::csv ? harness::to_csv(s) : harness::to_json(s);
      },
      py::arg("config_text"), py::arg("format") = "json", py::arg("workers") = 0,
      "Runs an experiment described by configuration text; returns CSV or JSON text.");
}
