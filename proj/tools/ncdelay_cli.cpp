// ncdelay: run coding-delay experiments, evaluate bounds, check the rank lemmas.
//
// Exit status: 0 success, 2 success with violated bound side conditions,
// 1 error (or a failed lemma check).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ncdelay/bounds.hpp"
#include "ncdelay/config.hpp"
#include "ncdelay/harness.hpp"
#include "ncdelay/oracles.hpp"

namespace {

using namespace ncdelay;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("--config,-c", c.config, "Configuration file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed (overrides experiment.seed)");
  cmd->add_option("--trials", c.trials, "Trials per configuration (overrides experiment.trials)");
  cmd->add_option("--out,-o", c.out, "Output path (default: output.path, else stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

harness::ExperimentConfig load(const Common& c) {
  auto m = config::ConfigMap::load(c.config);
  if (c.seed) m.set("experiment.seed", std::to_string(*c.seed));
  if (c.trials) m.set("experiment.trials", std::to_string(*c.trials));
  if (!c.out.empty()) m.set("output.path", c.out);
  if (!c.format.empty()) m.set("output.format", c.format);
  return harness::experiment_from_config(m);
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

int report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return warnings.empty() ? 0 : 2;
}

int run_simulate(const Common& c) {
  const auto cfg = load(c);
  const auto summary = harness::run_experiment(cfg);
  if (cfg.output_path.empty() || cfg.output_path == "-") {
    std::cout << (cfg.format == harness::OutputFormat::csv ? harness::to_csv(summary) : harness::to_json(summary));
  } else {
    harness::emit(summary, cfg.format, cfg.output_path);
  }
  return report_warnings(summary.warnings);
}

int run_bound(const Common& c) {
  const auto cfg = load(c);
  std::ostringstream os;
  std::vector<std::string> warnings;
  const bool csv = cfg.format == harness::OutputFormat::csv;
  if (csv) os << "regime,k,L,q,alpha,epsilon,p,bound,w,constraints_ok\n";
  std::vector<std::string> json_rows;
  for (const auto& net : harness::grid(cfg)) {
    for (auto r : cfg.regimes) {
      const auto q = harness::bound_query(cfg, net, r);
      const auto bv = bounds::evaluate(q);
      const std::string w = bv.w_used ? harness::format_double(*bv.w_used) : "";
      if (csv) {
        os << bounds::to_string(r) << ',' << net.code.k << ',' << net.links() << ',' << net.code.q << ','
           << net.code.alpha() << ',' << harness::format_double(cfg.epsilon) << ',' << harness::format_double(q.p)
           << ',' << harness::format_double(bv.value) << ',' << w << ',' << (bv.constraints_ok ? "true" : "false")
           << '\n';
      } else {
        std::ostringstream j;
        j << "  {\"regime\": \"" << bounds::to_string(r) << "\", \"k\": " << net.code.k << ", \"L\": " << net.links()
          << ", \"q\": " << net.code.q << ", \"alpha\": " << net.code.alpha()
          << ", \"epsilon\": " << harness::format_double(cfg.epsilon) << ", \"p\": " << harness::format_double(q.p)
          << ", \"bound\": " << harness::format_double(bv.value) << ", \"w\": " << (w.empty() ? "null" : w)
          << ", \"constraints_ok\": " << (bv.constraints_ok ? "true" : "false") << "}";
        json_rows.push_back(j.str());
      }
      for (const auto& v : bv.violations) warnings.push_back(std::string(bounds::to_string(r)) + ": " + v);
    }
  }
  if (!csv) {
    os << "[\n";
    for (std::size_t i = 0; i < json_rows.size(); ++i) os << json_rows[i] << (i + 1 < json_rows.size() ? ",\n" : "\n");
    os << "]\n";
  }
  write_text(os.str(), cfg.output_path);
  return report_warnings(warnings);
}

std::string filler_name(oracles::Filler f) {
  switch (f) {
    case oracles::Filler::zero: return "zero";
    case oracles::Filler::independent_random: return "random";
    case oracles::Filler::copied_rows: return "copied";
  }
  return "?";
}

int run_verify(const Common& c) {
  const std::uint64_t seed = c.seed.value_or(1);
  const std::size_t trials = c.trials.value_or(20000);
  Rng rng(seed);
  std::ostringstream os;
  os << "check,pass,detail\n";
  bool all = true;
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    all = all && pass;
    os << name << ',' << (pass ? "true" : "false") << ',' << detail << '\n';
  };

  for (std::size_t k = 1; k <= 20; ++k) {
    for (std::size_t n = k; n * k <= 20; ++n) {
      const auto t = oracles::exact_rank_tail(n, k);
      const double bound = std::ldexp(1.0, -static_cast<int>(n - k));
      line("rank-tail-exact n=" + std::to_string(n) + " k=" + std::to_string(k), t.value() <= bound,
           std::to_string(t.num) + "/" + std::to_string(t.den) + " <= " + harness::format_double(bound));
    }
  }
  {
    const auto e = oracles::mc_rank_tail(74, 64, trials, rng);
    const double bound = std::ldexp(1.0, -10);
    line("rank-tail-mc n=74 k=64", e.ci.lo <= bound,
         harness::format_double(e.fraction) + " ci_lo " + harness::format_double(e.ci.lo) + " <= " +
             harness::format_double(bound));
  }
  for (auto orient : {oracles::Orientation::vertical, oracles::Orientation::horizontal}) {
    for (auto filler : {oracles::Filler::zero, oracles::Filler::independent_random, oracles::Filler::copied_rows}) {
      oracles::RbltParams p;
      p.w_star = 2;
      p.r_star = 6;
      p.r_l = orient == oracles::Orientation::vertical ? std::vector<std::size_t>{5, 4}
                                                       : std::vector<std::size_t>{7, 6};
      p.orientation = orient;
      p.filler = filler;
      const std::size_t n_star = orient == oracles::Orientation::vertical ? p.cols() : p.rows();
      for (std::size_t g = 0; g < n_star; g += 2) {
        const auto b = oracles::rblt_tail_bound(p, g);
        const auto e = oracles::mc_rblt_tail(p, g, std::max<std::size_t>(trials / 10, 100), rng);
        line(std::string("rblt ") + (orient == oracles::Orientation::vertical ? "vertical" : "horizontal") +
                 " filler=" + filler_name(filler) + " gamma=" + std::to_string(g),
             e.ci.lo <= b.value,
             harness::format_double(e.fraction) + " vs bound " + harness::format_double(b.value));
      }
    }
  }
  {
    const auto rep = oracles::density_transfer_check(gf2::BitMatrix::from_strings({"101", "011", "110"}), 2, 2,
                                                     trials, rng);
    line("density-transfer rank2", rep.pass, "exhaustive=" + std::string(rep.exhaustive ? "true" : "false"));
    const auto big = oracles::density_transfer_check(8, 8, 2, trials, rng);
    line("density-transfer random 8x8", big.pass,
         "chi2 " + harness::format_double(big.chi_square) + " <= " + harness::format_double(big.critical));
  }
  write_text(os.str(), c.out);
  return all ? 0 : 1;
}

std::vector<std::size_t> parse_axis(const std::string& s, const char* name) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw config::ConfigError(name, "expected a comma-separated list of integers");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coding-delay simulator and bound checker for network codes over line networks"};
  app.require_subcommand(1);
  Common sim, bnd, ver, swp;
  std::string sk, sl, sq;

  auto* simulate = app.add_subcommand("simulate", "Run trials and compare delays with the selected bounds");
  add_common(simulate, sim, true);
  auto* bound = app.add_subcommand("bound", "Evaluate the selected bounds without simulating");
  add_common(bound, bnd, true);
  auto* verify = app.add_subcommand("verify-lemmas", "Exhaustive and Monte Carlo checks of the rank lemmas");
  add_common(verify, ver, false);
  auto* sweep = app.add_subcommand("sweep", "Run a grid over k, L and q");
  add_common(sweep, swp, true);
  sweep->add_option("--k", sk, "Comma-separated k values (overrides sweep.k)");
  sweep->add_option("--L", sl, "Comma-separated link counts (overrides sweep.L)");
  sweep->add_option("--q", sq, "Comma-separated chunk counts (overrides sweep.q)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return run_simulate(sim);
    if (*bound) return run_bound(bnd);
    if (*verify) return run_verify(ver);
    if (*sweep) {
      auto m = config::ConfigMap::load(swp.config);
      if (swp.seed) m.set("experiment.seed", std::to_string(*swp.seed));
      if (swp.trials) m.set("experiment.trials", std::to_string(*swp.trials));
      if (!swp.out.empty()) m.set("output.path", swp.out);
      if (!swp.format.empty()) m.set("output.format", swp.format);
      if (!sk.empty()) m.set("sweep.k", sk);
      if (!sl.empty()) m.set("sweep.L", sl);
      if (!sq.empty()) m.set("sweep.q", sq);
      parse_axis(sk, "--k");
      parse_axis(sl, "--L");
      parse_axis(sq, "--q");
      auto cfg = harness::experiment_from_config(m);
      if (cfg.sweep_k.empty() && cfg.sweep_L.empty() && cfg.sweep_q.empty()) {
        throw config::ConfigError("sweep", "no axis given (sweep.k, sweep.L or sweep.q)");
      }
      const auto summary = harness::run_experiment(cfg);
      if (cfg.output_path.empty() || cfg.output_path == "-") {
        std::cout << (cfg.format == harness::OutputFormat::csv ? harness::to_csv(summary) : harness::to_json(summary));
      } else {
        harness::emit(summary, cfg.format, cfg.output_path);
      }
      return report_warnings(summary.warnings);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
