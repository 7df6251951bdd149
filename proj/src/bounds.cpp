#include "ncdelay/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ncdelay::bounds {

namespace {

struct RegimeName {
  Regime regime;
  std::string_view name;
};

constexpr std::array<RegimeName, 12> kNames{{
    {Regime::dense_delay, "dense-delay"},
    {Regime::dense_avg, "dense-avg"},
    {Regime::dense_delay_unequal, "dense-delay-unequal"},
    {Regime::dense_avg_unequal, "dense-avg-unequal"},
    {Regime::cc_delay, "cc-delay"},
    {Regime::cc_avg, "cc-avg"},
    {Regime::cc_delay_unequal, "cc-delay-unequal"},
    {Regime::cc_avg_unequal, "cc-avg-unequal"},
    {Regime::ccp_delay, "ccp-delay"},
    {Regime::ccp_avg, "ccp-avg"},
    {Regime::ccp_delay_unequal, "ccp-delay-unequal"},
    {Regime::ccp_avg_unequal, "ccp-avg-unequal"},
}};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void require(BoundValue& out, bool ok, const std::string& lhs, double l, const std::string& rhs, double r) {
  if (ok) return;
  out.constraints_ok = false;
  out.violations.push_back(lhs + " < " + rhs + " fails (" + fmt(l) + " vs " + fmt(r) + ")");
}

// Effective chunk count: dense regimes are the single-chunk case.
double chunks(const BoundQuery& q) { return is_dense(q.regime) ? 1.0 : q.q; }

double log_kl_eps(const BoundQuery& q) { return std::log2(q.k * q.L / q.epsilon); }

}  // namespace

std::string_view to_string(Regime r) noexcept {
  for (const auto& n : kNames) {
    if (n.regime == r) return n.name;
  }
  return "unknown";
}

Regime parse_regime(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.regime;
  }
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

const std::vector<Regime>& all_regimes() {
  static const std::vector<Regime> all = [] {
    std::vector<Regime> v;
    for (const auto& n : kNames) v.push_back(n.regime);
    return v;
  }();
  return all;
}

bool is_dense(Regime r) noexcept { return r <= Regime::dense_avg_unequal; }
bool is_cc(Regime r) noexcept { return r >= Regime::cc_delay && r <= Regime::cc_avg_unequal; }
bool is_ccp(Regime r) noexcept { return r >= Regime::ccp_delay; }

bool is_unequal(Regime r) noexcept {
  switch (r) {
    case Regime::dense_delay_unequal:
    case Regime::dense_avg_unequal:
    case Regime::cc_delay_unequal:
    case Regime::cc_avg_unequal:
    case Regime::ccp_delay_unequal:
    case Regime::ccp_avg_unequal:
      return true;
    default:
      return false;
  }
}

bool is_average(Regime r) noexcept {
  switch (r) {
    case Regime::dense_avg:
    case Regime::dense_avg_unequal:
    case Regime::cc_avg:
    case Regime::cc_avg_unequal:
    case Regime::ccp_avg:
    case Regime::ccp_avg_unequal:
      return true;
    default:
      return false;
  }
}

double growth(Growth g, double k) {
  switch (g) {
    case Growth::log2_k:
      return std::log2(k);
    case Growth::log2_log2_k:
      return std::log2(std::max(2.0, std::log2(k)));
    case Growth::sqrt_k:
      return std::sqrt(k);
  }
  return std::log2(k);
}

double BoundQuery::delta() const {
  if (!gamma_e) throw std::invalid_argument("bound: gamma_e is required by regime " + std::string(to_string(regime)));
  return std::min(*gamma_e / p, 1.0);
}

void BoundQuery::validate() const {
  if (!(k >= 1)) throw std::invalid_argument("bound.k must be >= 1");
  if (!(L >= 1)) throw std::invalid_argument("bound.L must be >= 1");
  if (!(q >= 1)) throw std::invalid_argument("bound.q must be >= 1");
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("bound.epsilon must lie in (0, 1)");
  if (!(p > 0 && p <= 1)) throw std::invalid_argument("bound.p must lie in (0, 1]");
  if (gamma_e && !(*gamma_e > 0)) throw std::invalid_argument("bound.gamma_e must be positive");
  if (is_unequal(regime) && !gamma_e) {
    throw std::invalid_argument("bound.gamma_e is required by regime " + std::string(to_string(regime)));
  }
  if (!(implied_constant > 0)) throw std::invalid_argument("bound.implied_constant must be positive");
}

ChernoffSlack gamma_star(double phi, double w_T, double epsilon) {
  ChernoffSlack s;
  if (!(phi > 0)) {
    s.gamma_star = 1.0;
    s.vacuous = true;
    return s;
  }
  const double g = std::sqrt((2.0 / phi) * std::log(2.0 * w_T / epsilon));
  // Rounding at the boundary phi = 2 ln(2 w_T / eps) must still read as vacuous.
  if (g >= 1.0 - 1e-12) {
    s.gamma_star = 1.0;
    s.vacuous = true;
    s.r = 0;
    return s;
  }
  s.gamma_star = g;
  s.r = std::floor((1.0 - g) * phi);
  return s;
}

double active_partitions(double w, double L) {
  if (w < L) throw std::invalid_argument("active_partitions: w must be >= L");
  return L * (w - L + 1.0);
}

double w_formula(const BoundQuery& q) {
  const double c = chunks(q);
  const double lg = log_kl_eps(q);
  switch (q.regime) {
    case Regime::dense_delay:
    case Regime::dense_delay_unequal:
    case Regime::cc_delay:
    case Regime::cc_delay_unequal:
    case Regime::ccp_delay:
    case Regime::ccp_delay_unequal:
      return std::cbrt(q.k * q.L * q.L / (c * lg));
    case Regime::dense_avg:
    case Regime::cc_avg:
    case Regime::ccp_avg:
      return std::sqrt(q.k * q.L / (c * lg));
    case Regime::dense_avg_unequal:
    case Regime::cc_avg_unequal:
    case Regime::ccp_avg_unequal:
      return q.k / (c * growth(q.f_k, q.k) * lg);
  }
  return q.L;
}

PartitionPlan partition_plan(const BoundQuery& q) {
  q.validate();
  PartitionPlan plan;
  const double raw = w_formula(q);
  plan.degenerate = !(raw >= 1.0);
  plan.w = std::max(q.L, std::round(raw));
  plan.w_T = active_partitions(plan.w, q.L);
  const double c = chunks(q);
  const double n_t = q.k / q.p;
  plan.phi = q.p * n_t / (plan.w * c);
  const auto s = gamma_star(plan.phi, plan.w_T * c, q.epsilon);
  plan.gamma_star = s.gamma_star;
  plan.r = s.r;
  plan.vacuous = s.vacuous;
  return plan;
}

BoundValue delay_bound(const BoundQuery& q) {
  if (is_ccp(q.regime)) throw std::invalid_argument("delay_bound: precoded regimes go through ccp_bound");
  q.validate();
  const auto plan = partition_plan(q);
  const double c = chunks(q);
  const double k = q.k, L = q.L, w = plan.w, C = q.implied_constant;
  const double lg = log_kl_eps(q);
  const double wl = w * c * std::log2(w * c * L / q.epsilon);  // wq log(wqL/eps)

  BoundValue out;
  out.w_used = w;
  double extra = k * L / w;
  switch (q.regime) {
    case Regime::dense_delay:
    case Regime::cc_delay:
      extra += std::sqrt(k * wl) + wl;
      break;
    case Regime::dense_avg:
    case Regime::cc_avg:
      extra += wl;
      break;
    case Regime::dense_delay_unequal:
    case Regime::cc_delay_unequal:
      extra += std::sqrt(k * wl);
      break;
    default:
      break;
  }
  out.value = (k + extra) / q.p;

  if (plan.degenerate) {
    out.constraints_ok = false;
    out.violations.push_back("partition count formula below 1 (clamped to L)");
  }
  if (is_unequal(q.regime)) {
    const double d = q.delta();
    require(out, wl < C * d * k, "w q log(w q L/eps)", wl, "delta k", C * d * k);
    if (q.regime == Regime::dense_avg_unequal || q.regime == Regime::cc_avg_unequal) {
      const double f = growth(q.f_k, k);
      require(out, f < C * k / (L * lg), "f(k)", f, "k/(L log(kL/eps))", C * k / (L * lg));
    }
    if (q.regime == Regime::cc_delay_unequal) {
      require(out, c < C * d * k / (L * lg), "q", c, "delta k/(L log(kL/eps))", C * d * k / (L * lg));
    }
    if (q.regime == Regime::cc_avg_unequal) {
      const double f = growth(q.f_k, k);
      require(out, c < C * d * k / (f * L * lg), "q", c, "delta k/(f(k) L log(kL/eps))", C * d * k / (f * L * lg));
    }
  } else {
    require(out, wl < C * k, "w q log(w q L/eps)", wl, "k", C * k);
    if (is_cc(q.regime)) {
      require(out, c < C * k / (L * lg), "q", c, "k/(L log(kL/eps))", C * k / (L * lg));
    }
  }
  return out;
}

double ccp_alpha_threshold(const BoundQuery& q) {
  if (!is_ccp(q.regime)) throw std::invalid_argument("ccp_alpha_threshold: not a precoded regime");
  const double L = q.L, gb = q.gamma_b, gc = q.gamma_c, C = q.implied_constant;
  const double inf = std::numeric_limits<double>::infinity();
  auto lg = [&](double x) { return x > 0 ? std::log2(x) : inf; };
  const double bc = gb * gc > 0 ? L / (gb * gc) : inf;
  switch (q.regime) {
    case Regime::ccp_delay:
      return C * std::max(L / (gc * gc * gc) * lg(bc), std::pow(L, 4) * lg(gb > 0 ? L / gb : inf));
    case Regime::ccp_avg:
      return C * L / gc * lg(bc);
    case Regime::ccp_delay_unequal: {
      const double ge = *q.gamma_e;
      return C * std::max(L / (gc * gc * gc) * lg(bc), L / (ge * ge * ge) * lg(ge * gb > 0 ? L / (ge * gb) : inf));
    }
    case Regime::ccp_avg_unequal: {
      const double ge = *q.gamma_e;
      return C * L / (ge * ge * gc) * lg(bc);
    }
    default:
      return inf;
  }
}

BoundValue ccp_bound(const BoundQuery& q) {
  if (!is_ccp(q.regime)) throw std::invalid_argument("ccp_bound: not a precoded regime");
  q.validate();
  for (double g : {q.gamma_a, q.gamma_b, q.gamma_c}) {
    if (!(g >= 0 && g < 1)) throw std::invalid_argument("ccp_bound: gamma constants must lie in [0, 1)");
  }
  BoundValue out;
  const double gb = q.gamma_b;
  out.value = (1 + q.gamma_c) * (1 + (1 + q.gamma_a) * gb + gb * gb) * q.k / q.p;

  const double alpha = q.alpha();
  const double thr = ccp_alpha_threshold(q);
  if (!(alpha >= thr)) {
    out.constraints_ok = false;
    out.violations.push_back("alpha >= " + fmt(thr) + " fails (alpha = " + fmt(alpha) + ")");
  }
  const double lhs = q.gamma_a * gb > 0 ? alpha * alpha / (q.gamma_a * q.gamma_a * gb * gb)
                                        : std::numeric_limits<double>::infinity();
  const double rhs = q.implied_constant * q.k / std::log2(1.0 / q.epsilon);
  require(out, lhs < rhs, "alpha^2/(gamma_a^2 gamma_b^2)", lhs, "k/log(1/eps)", rhs);
  return out;
}

BoundValue evaluate(const BoundQuery& q) { return is_ccp(q.regime) ? ccp_bound(q) : delay_bound(q); }

}  // namespace ncdelay::bounds
