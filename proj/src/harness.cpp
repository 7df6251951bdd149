#include "ncdelay/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ncdelay::harness {

using config::ConfigError;
using config::ConfigMap;

namespace {

constexpr const char* kCsvHeader =
    "regime,k,L,q,alpha,epsilon,bound,mean_delay,p50,p95,fail_frac,fail_ci_lo,fail_ci_hi,censored,trials,seed";

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

// Per-link values for a grid point with `links` links.
std::vector<double> resize_links(const std::vector<double>& base, std::size_t links, const char* field) {
  if (base.empty() || base.size() == links) return base;
  const bool uniform = std::all_of(base.begin(), base.end(), [&](double x) { return x == base.front(); });
  if (!uniform) {
    throw ConfigError(field, "has " + std::to_string(base.size()) + " per-link values; a grid point with " +
                                 std::to_string(links) + " links needs one value repeated or exactly " +
                                 std::to_string(links));
  }
  return std::vector<double>(links, base.front());
}

std::string_view order_name(sim::SameInstantOrder o) {
  return o == sim::SameInstantOrder::upstream_first ? "upstream-first" : "strictly-later";
}

std::string_view growth_name(bounds::Growth g) {
  switch (g) {
    case bounds::Growth::log2_k:
      return "log2";
    case bounds::Growth::log2_log2_k:
      return "log2log2";
    case bounds::Growth::sqrt_k:
      return "sqrt";
  }
  return "log2";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("output.format", "expected csv or json, got '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- configuration

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "network.p",          "network.lambda",       "network.traffic",    "network.horizon_cap",
      "network.order",      "network.payload",      "network.links",      "code.k",
      "code.q",             "code.scheme",          "code.alpha",         "code.payload_dim",
      "code.precode.gamma_a", "code.precode.gamma_b", "code.precode.margin", "bound.gamma_c",
      "bound.f_k",          "bound.implied_constant", "experiment.trials", "experiment.seed",
      "experiment.epsilon", "experiment.confidence", "experiment.regimes", "output.path",
      "output.format",      "sweep.k",              "sweep.L",            "sweep.q",
  };
  return keys;
}

ExperimentConfig experiment_from_config(const ConfigMap& m) {
  m.reject_unknown(known_keys());
  ExperimentConfig cfg;

  if (auto v = m.real("experiment.epsilon")) cfg.epsilon = *v;
  if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) throw ConfigError("experiment.epsilon", "must lie in (0, 1)");
  if (auto v = m.real("experiment.confidence")) cfg.confidence = *v;
  if (auto v = m.integer("experiment.trials")) cfg.trials = *v;
  if (auto v = m.integer("experiment.seed")) cfg.master_seed = *v;
  if (auto v = m.strings("experiment.regimes")) {
    for (const auto& name : *v) {
      try {
        cfg.regimes.push_back(bounds::parse_regime(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("experiment.regimes", e.what());
      }
    }
  }

  auto& net = cfg.network;
  const auto traffic = m.str("network.traffic").value_or("regular");
  auto p = m.reals("network.p").value_or(std::vector<double>{});
  if (p.empty()) throw ConfigError("network.p", "is required");
  auto lambda = m.reals("network.lambda").value_or(std::vector<double>{});
  if (auto links = m.integer("network.links")) {
    if (*links == 0) throw ConfigError("network.links", "must be positive");
    p = resize_links(p, *links, "network.p");
    lambda = resize_links(lambda, *links, "network.lambda");
  }
  if (traffic == "regular") {
    if (!lambda.empty()) throw ConfigError("network.lambda", "only applies to poisson traffic");
    net.traffic = traffic::TrafficSpec::regular(p);
  } else if (traffic == "poisson") {
    if (lambda.empty()) throw ConfigError("network.lambda", "is required for poisson traffic");
    net.traffic = traffic::TrafficSpec::poisson(lambda, p);
  } else {
    throw ConfigError("network.traffic", "expected regular or poisson, got '" + traffic + "'");
  }
  if (auto v = m.real("network.horizon_cap")) net.horizon_cap = *v;
  if (auto v = m.str("network.order")) {
    if (*v == "upstream-first") {
      net.order = sim::SameInstantOrder::upstream_first;
    } else if (*v == "strictly-later") {
      net.order = sim::SameInstantOrder::strictly_later;
    } else {
      throw ConfigError("network.order", "expected upstream-first or strictly-later, got '" + *v + "'");
    }
  }
  if (auto v = m.boolean("network.payload")) net.payload_mode = *v;

  const auto k = m.integer("code.k");
  if (!k) throw ConfigError("code.k", "is required");
  const auto scheme = m.str("code.scheme").value_or("dense");
  if (scheme == "dense") {
    net.code = codec::CodeConfig::dense(*k);
    if (auto q = m.integer("code.q"); q && *q != 1) net.code = codec::CodeConfig::chunked(*k, *q);
  } else if (scheme == "chunked") {
    net.code = codec::CodeConfig::chunked(*k, m.integer("code.q").value_or(1));
  } else if (scheme == "precoded") {
    if (m.has("code.q")) throw ConfigError("code.q", "is derived from code.alpha for precoded codes");
    const auto alpha = m.integer("code.alpha");
    if (!alpha || *alpha == 0) throw ConfigError("code.alpha", "a positive chunk size is required for precoded codes");
    codec::PrecodeConfig pc;
    if (auto v = m.real("code.precode.gamma_a")) pc.gamma_a = *v;
    if (auto v = m.real("code.precode.gamma_b")) pc.gamma_b = *v;
    const auto margin = m.str("code.precode.margin").value_or("auto");
    if (margin == "auto") {
      pc.margin = codec::PrecodeConfig::with_epsilon(pc.gamma_a, pc.gamma_b, cfg.epsilon).margin;
    } else {
      pc.margin = m.integer("code.precode.margin").value();
    }
    try {
      pc.validate(*k);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("code.precode", e.what());
    }
    cfg.precode = pc;
    cfg.precode_alpha = *alpha;
    net.code = codec::CodeConfig::precoded(*k, *alpha, pc);
  } else {
    throw ConfigError("code.scheme", "expected dense, chunked or precoded, got '" + scheme + "'");
  }
  if (scheme != "precoded") {
    for (const char* key : {"code.alpha", "code.precode.gamma_a", "code.precode.gamma_b", "code.precode.margin"}) {
      if (m.has(key)) throw ConfigError(key, "only applies to precoded codes");
    }
  }
  if (auto v = m.integer("code.payload_dim")) net.code.payload_dim = *v;

  if (auto v = m.real("bound.gamma_c")) cfg.gamma_c = *v;
  if (auto v = m.str("bound.f_k")) {
    if (*v == "log2") {
      cfg.f_k = bounds::Growth::log2_k;
    } else if (*v == "log2log2") {
      cfg.f_k = bounds::Growth::log2_log2_k;
    } else if (*v == "sqrt") {
      cfg.f_k = bounds::Growth::sqrt_k;
    } else {
      throw ConfigError("bound.f_k", "expected log2, log2log2 or sqrt, got '" + *v + "'");
    }
  }
  if (auto v = m.real("bound.implied_constant")) cfg.implied_constant = *v;

  if (auto v = m.str("output.path")) cfg.output_path = *v;
  if (auto v = m.str("output.format")) cfg.format = parse_format(*v);

  if (auto v = m.integers("sweep.k")) cfg.sweep_k = to_sizes(*v);
  if (auto v = m.integers("sweep.L")) cfg.sweep_L = to_sizes(*v);
  if (auto v = m.integers("sweep.q")) cfg.sweep_q = to_sizes(*v);

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (trials == 0) throw ConfigError("experiment.trials", "must be at least 1");
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("experiment.epsilon", "must lie in (0, 1)");
  if (!(confidence > 0 && confidence < 1)) throw ConfigError("experiment.confidence", "must lie in (0, 1)");
  if (!(gamma_c >= 0 && gamma_c < 1)) throw ConfigError("bound.gamma_c", "must lie in [0, 1)");
  if (!(implied_constant > 0)) throw ConfigError("bound.implied_constant", "must be positive");
  if (precode && !sweep_q.empty()) throw ConfigError("sweep.q", "precoded codes fix q through code.alpha");
  for (auto v : sweep_k) {
    if (v == 0) throw ConfigError("sweep.k", "values must be positive");
  }
  for (auto v : sweep_L) {
    if (v == 0) throw ConfigError("sweep.L", "values must be positive");
  }
  for (auto v : sweep_q) {
    if (v == 0) throw ConfigError("sweep.q", "values must be positive");
  }
  try {
    network.traffic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("network", e.what());
  }
  for (const auto& net : grid(*this)) {
    try {
      net.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(sweep_k.empty() && sweep_L.empty() && sweep_q.empty() ? "code" : "sweep", e.what());
    }
    for (auto r : regimes) {
      try {
        bounds::evaluate(bound_query(*this, net, r));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("experiment.regimes", e.what());
      }
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  const auto& n = network;
  os << "network.traffic=" << (n.traffic.kind == traffic::ScheduleKind::poisson ? "poisson" : "regular") << '\n'
     << "network.p=" << join(n.traffic.p) << '\n'
     << "network.lambda=" << join(n.traffic.lambda) << '\n'
     << "network.horizon_cap=" << (n.horizon_cap ? format_double(*n.horizon_cap) : "default") << '\n'
     << "network.order=" << order_name(n.order) << '\n'
     << "network.payload=" << (n.payload_mode ? "true" : "false") << '\n'
     << "code.k=" << n.code.k << '\n'
     << "code.q=" << n.code.q << '\n'
     << "code.scheme=" << (precode ? "precoded" : n.code.is_dense() ? "dense" : "chunked") << '\n'
     << "code.payload_dim=" << (n.code.payload_dim ? std::to_string(*n.code.payload_dim) : "default") << '\n';
  if (precode) {
    os << "code.alpha=" << precode_alpha << '\n'
       << "code.precode.gamma_a=" << format_double(precode->gamma_a) << '\n'
       << "code.precode.gamma_b=" << format_double(precode->gamma_b) << '\n'
       << "code.precode.margin=" << precode->margin << '\n';
  }
  os << "bound.gamma_c=" << format_double(gamma_c) << '\n'
     << "bound.f_k=" << growth_name(f_k) << '\n'
     << "bound.implied_constant=" << format_double(implied_constant) << '\n'
     << "experiment.trials=" << trials << '\n'
     << "experiment.epsilon=" << format_double(epsilon) << '\n'
     << "experiment.confidence=" << format_double(confidence) << '\n'
     << "experiment.regimes=";
  for (std::size_t i = 0; i < regimes.size(); ++i) os << (i ? "," : "") << bounds::to_string(regimes[i]);
  os << '\n'
     << "sweep.k=" << join(sweep_k) << '\n'
     << "sweep.L=" << join(sweep_L) << '\n'
     << "sweep.q=" << join(sweep_q) << '\n';
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- running

std::size_t worker_count() {
  if (const char* env = std::getenv("NCDELAY_WORKERS")) {
    std::size_t n = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<sim::TrialResult>> run_batches(std::span<const sim::NetworkConfig> networks,
                                                       std::size_t trials, std::uint64_t master_seed,
                                                       std::size_t workers) {
  for (const auto& n : networks) n.validate();
  std::vector<std::vector<sim::TrialResult>> out(networks.size(), std::vector<sim::TrialResult>(trials));
  const std::size_t total = networks.size() * trials;
  if (total == 0) return out;
  if (workers == 0) workers = worker_count();
  workers = std::min(workers, total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      const std::size_t ni = task / trials;
      const std::size_t ti = task % trials;
      try {
        out[ni][ti] = sim::run_trial(networks[ni], sim::trial_seed(master_seed, ti));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(total);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<sim::TrialResult> run_trials(const sim::NetworkConfig& network, std::size_t trials,
                                         std::uint64_t master_seed, std::size_t workers) {
  return std::move(run_batches(std::span(&network, 1), trials, master_seed, workers).front());
}

stats::Proportion failure_fraction(std::span<const double> samples, double threshold, double confidence) {
  return stats::exceed_fraction(samples, threshold, confidence);
}

bounds::BoundQuery bound_query(const ExperimentConfig& cfg, const sim::NetworkConfig& network, bounds::Regime regime) {
  const auto eq = traffic::equivalent_min_param(network.traffic);
  bounds::BoundQuery q;
  q.regime = regime;
  q.k = static_cast<double>(network.code.k);
  q.L = static_cast<double>(network.links());
  const double alpha = static_cast<double>(network.code.alpha());
  q.q = bounds::is_ccp(regime) ? q.k / alpha : static_cast<double>(network.code.q);
  q.epsilon = cfg.epsilon;
  q.p = eq.p;
  q.gamma_e = eq.gamma_e;
  if (q.gamma_e && *q.gamma_e == 0.0) q.gamma_e.reset();
  if (network.code.precode) {
    q.gamma_a = network.code.precode->gamma_a;
    q.gamma_b = network.code.precode->gamma_b;
  }
  q.gamma_c = cfg.gamma_c;
  q.f_k = cfg.f_k;
  q.implied_constant = cfg.implied_constant;
  return q;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const sim::NetworkConfig& network,
                                  std::span<const sim::TrialResult> trials, std::vector<std::string>* warnings) {
  if (trials.empty()) throw std::invalid_argument("summarize: no trials");
  std::vector<double> delays;
  std::vector<double> for_failure;
  std::size_t censored = 0;
  for (const auto& t : trials) {
    delays.push_back(t.delay_or_cap());
    for_failure.push_back(t.censored() ? std::numeric_limits<double>::infinity() : *t.coding_delay);
    if (t.censored()) ++censored;
  }
  std::sort(delays.begin(), delays.end());
  const double mean = stats::mean(delays);
  const double p50 = stats::sorted_quantile(delays, 0.5);
  const double p95 = stats::sorted_quantile(delays, 0.95);

  std::vector<SummaryRow> rows;
  for (auto regime : cfg.regimes) {
    const auto bv = bounds::evaluate(bound_query(cfg, network, regime));
    const auto ff = failure_fraction(for_failure, bv.value, cfg.confidence);
    SummaryRow r;
    r.regime = std::string(bounds::to_string(regime));
    r.k = network.code.k;
    r.L = network.links();
    r.q = network.code.q;
    r.alpha = network.code.alpha();
    r.epsilon = cfg.epsilon;
    r.bound = bv.value;
    r.mean_delay = mean;
    r.p50 = p50;
    r.p95 = p95;
    r.fail_frac = ff.fraction;
    r.fail_ci_lo = ff.ci.lo;
    r.fail_ci_hi = ff.ci.hi;
    r.censored = censored;
    r.trials = trials.size();
    r.seed = cfg.master_seed;
    rows.push_back(r);
    if (warnings) {
      for (const auto& v : bv.violations) {
        warnings->push_back(r.regime + " k=" + std::to_string(r.k) + " L=" + std::to_string(r.L) +
                            " q=" + std::to_string(r.q) + ": " + v);
      }
    }
  }
  return rows;
}

std::vector<sim::NetworkConfig> grid(const ExperimentConfig& cfg) {
  const auto& base = cfg.network;
  const std::vector<std::size_t> ks = cfg.sweep_k.empty() ? std::vector<std::size_t>{base.code.k} : cfg.sweep_k;
  const std::vector<std::size_t> ls = cfg.sweep_L.empty() ? std::vector<std::size_t>{base.links()} : cfg.sweep_L;
  const std::vector<std::size_t> qs = cfg.sweep_q.empty() ? std::vector<std::size_t>{base.code.q} : cfg.sweep_q;
  std::vector<sim::NetworkConfig> out;
  for (auto k : ks) {
    for (auto L : ls) {
      for (auto q : qs) {
        sim::NetworkConfig n = base;
        n.traffic.p = resize_links(base.traffic.p, L, "network.p");
        n.traffic.lambda = resize_links(base.traffic.lambda, L, "network.lambda");
        if (cfg.precode) {
          n.code = codec::CodeConfig::precoded(k, cfg.precode_alpha, *cfg.precode);
        } else {
          n.code = q == 1 && base.code.is_dense() ? codec::CodeConfig::dense(k) : codec::CodeConfig::chunked(k, q);
        }
        n.code.payload_dim = base.code.payload_dim;
        out.push_back(std::move(n));
      }
    }
  }
  return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  const auto networks = grid(cfg);
  const auto batches = run_batches(networks, cfg.trials, cfg.master_seed, workers);
  ExperimentSummary s;
  s.config_hash = cfg.hash();
  s.seed = cfg.master_seed;
  for (std::size_t i = 0; i < networks.size(); ++i) {
    auto rows = summarize(cfg, networks[i], batches[i], &s.warnings);
    s.rows.insert(s.rows.end(), rows.begin(), rows.end());
  }
  return s;
}

// ---------------------------------------------------------------- output

std::string to_csv(const ExperimentSummary& s) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : s.rows) {
    out += r.regime + ',' + std::to_string(r.k) + ',' + std::to_string(r.L) + ',' + std::to_string(r.q) + ',' +
           std::to_string(r.alpha) + ',' + format_double(r.epsilon) + ',' + format_double(r.bound) + ',' +
           format_double(r.mean_delay) + ',' + format_double(r.p50) + ',' + format_double(r.p95) + ',' +
           format_double(r.fail_frac) + ',' + format_double(r.fail_ci_lo) + ',' + format_double(r.fail_ci_hi) +
           ',' + std::to_string(r.censored) + ',' + std::to_string(r.trials) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::string to_json(const ExperimentSummary& s) {
  nlohmann::ordered_json j;
  j["config_hash"] = s.config_hash;
  j["seed"] = s.seed;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : s.rows) {
    j["rows"].push_back({{"regime", r.regime},
                         {"k", r.k},
                         {"L", r.L},
                         {"q", r.q},
                         {"alpha", r.alpha},
                         {"epsilon", r.epsilon},
                         {"bound", r.bound},
                         {"mean_delay", r.mean_delay},
                         {"p50", r.p50},
                         {"p95", r.p95},
                         {"fail_frac", r.fail_frac},
                         {"fail_ci_lo", r.fail_ci_lo},
                         {"fail_ci_hi", r.fail_ci_hi},
                         {"censored", r.censored},
                         {"trials", r.trials},
                         {"seed", r.seed}});
  }
  j["warnings"] = s.warnings;
  return j.dump(2) + '\n';
}

ExperimentSummary summary_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentSummary s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& x : j.at("rows")) {
      SummaryRow r;
      r.regime = x.at("regime").get<std::string>();
      r.k = x.at("k").get<std::size_t>();
      r.L = x.at("L").get<std::size_t>();
      r.q = x.at("q").get<std::size_t>();
      r.alpha = x.at("alpha").get<std::size_t>();
      r.epsilon = x.at("epsilon").get<double>();
      r.bound = x.at("bound").get<double>();
      r.mean_delay = x.at("mean_delay").get<double>();
      r.p50 = x.at("p50").get<double>();
      r.p95 = x.at("p95").get<double>();
      r.fail_frac = x.at("fail_frac").get<double>();
      r.fail_ci_lo = x.at("fail_ci_lo").get<double>();
      r.fail_ci_hi = x.at("fail_ci_hi").get<double>();
      r.censored = x.at("censored").get<std::size_t>();
      r.trials = x.at("trials").get<std::size_t>();
      r.seed = x.at("seed").get<std::uint64_t>();
      s.rows.push_back(std::move(r));
    }
    s.warnings = j.value("warnings", std::vector<std::string>{});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("summary_from_json: ") + e.what());
  }
}

void emit(const ExperimentSummary& s, OutputFormat format, const std::filesystem::path& path) {
  const std::string text = format == OutputFormat::csv ? to_csv(s) : to_json(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace ncdelay::harness
