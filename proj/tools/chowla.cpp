// Command-line front end.  Every subcommand resolves its parameters in the
// same order: explicit flag, then config-file value, then built-in default.
// Machine-readable output goes to stdout; progress and notes go to stderr.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "chowla/config.hpp"
#include "chowla/correlation.hpp"
#include "chowla/decrement.hpp"
#include "chowla/entropy.hpp"
#include "chowla/functional_equation.hpp"
#include "chowla/gowers.hpp"
#include "chowla/log_average.hpp"
#include "chowla/report.hpp"
#include "chowla/sieve.hpp"
#include "chowla/util.hpp"
#include "chowla/version.hpp"

namespace {

using namespace chowla;

void note(const std::string& msg) { std::cerr << msg << std::endl; }

struct GlobalOptions {
  std::string config_path;
  unsigned threads = 1;
  std::string sieve_cache;
  std::string output_dir;
  std::string format;  // empty means per-command default
  ExperimentConfig cfg;

  std::string pick_format(const char* fallback) const {
    const std::string f =
        format.empty() ? cfg.get_string("output.format", fallback) : format;
    if (f != "csv" && f != "json")
      throw std::invalid_argument("output format must be csv or json, got '" +
                                  f + "'");
    return f;
  }

  std::string out_dir() const {
    return output_dir.empty() ? cfg.get_string("output.dir", "") : output_dir;
  }
};

SieveTable acquire_sieve(u64 limit, const GlobalOptions& g) {
  namespace fs = std::filesystem;
  if (!g.sieve_cache.empty() && fs::exists(g.sieve_cache)) {
    try {
      SieveTable t = SieveTable::read_cache(g.sieve_cache);
      if (t.limit() >= limit) {
        note("sieve: cache hit " + g.sieve_cache + ", limit " +
             std::to_string(t.limit()));
        return t;
      }
      note("sieve: cache limit " + std::to_string(t.limit()) +
           " below required " + std::to_string(limit) + ", rebuilding");
    } catch (const std::invalid_argument& e) {
      note(std::string("sieve: ignoring unreadable cache: ") + e.what());
    }
  }
  note("sieve: building table to " + std::to_string(limit));
  int last_quarter = 0;
  SieveTable t(limit, [&](double frac) {
    const int q = static_cast<int>(frac * 4.0);
    if (q > last_quarter && q < 4) {
      last_quarter = q;
      note("sieve: " + std::to_string(25 * q) + "%");
    }
  });
  if (!g.sieve_cache.empty()) {
    t.write_cache(g.sieve_cache);
    note("sieve: cached at " + g.sieve_cache);
  }
  return t;
}

void emit(const GlobalOptions& g, const std::string& name,
          const std::string& fmt, const std::string& content) {
  std::cout << content;
  if (content.empty() || content.back() != '\n') std::cout << "\n";
  std::cout.flush();
  const std::string dir = g.out_dir();
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / (name + "." + fmt);
    write_text_file(path, content);
    note("wrote " + path.string());
  }
}

// Shift-system parameters shared by the correlation-flavoured subcommands.
struct SpecFlags {
  std::optional<unsigned> k;
  std::optional<std::string> a_csv;
  std::optional<std::string> b_csv;
  std::optional<u64> x;
  std::optional<double> epsilon;
  std::optional<u64> dilation;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "number of shifted factors");
    cmd->add_option("--a-list", a_csv, "comma-separated dilation coefficients");
    cmd->add_option("--b-list", b_csv, "comma-separated shifts");
    cmd->add_option("--x", x, "averaging range endpoint");
    cmd->add_option("--epsilon", epsilon, "lower-cutoff / threshold exponent");
    cmd->add_option("--dilation", dilation, "common dilation factor");
  }
};

CorrelationSpec resolve_spec(const GlobalOptions& g, const SpecFlags& f,
                             ConfigEcho& echo) {
  CorrelationSpec spec;
  std::vector<i64> b;
  std::optional<std::vector<u64>> a;
  if (f.a_csv)
    a = parse_u64_list(*f.a_csv, "--a-list");
  else if (g.cfg.has("spec.a_list"))
    a = g.cfg.get_u64_list("spec.a_list", {});
  if (f.b_csv)
    b = parse_i64_list(*f.b_csv, "--b-list");
  else
    b = g.cfg.get_i64_list("spec.b_list", {});

  unsigned k = f.k ? *f.k : g.cfg.get_u64(
      "spec.k", a ? a->size() : (b.empty() ? 1 : b.size()));
  if (k == 0) throw std::invalid_argument("spec.k must be positive");
  if (a && a->size() != k)
    throw std::invalid_argument("spec.a_list length " +
                                std::to_string(a->size()) +
                                " does not match spec.k = " +
                                std::to_string(k));
  if (!b.empty() && b.size() != k)
    throw std::invalid_argument("spec.b_list length " +
                                std::to_string(b.size()) +
                                " does not match spec.k = " +
                                std::to_string(k));
  spec.a_list = a ? *a : std::vector<u64>(k, 1);
  if (b.empty())
    for (unsigned i = 0; i < k; ++i) b.push_back(static_cast<i64>(i));
  spec.b_list = b;
  spec.x = f.x ? *f.x : g.cfg.get_u64("spec.x", 1000000);
  spec.epsilon = f.epsilon ? *f.epsilon : g.cfg.get_double("spec.epsilon", 0.5);
  spec.dilation = f.dilation ? *f.dilation : 1;

  auto join = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  echo.emplace_back("spec.k", std::to_string(k));
  echo.emplace_back("spec.a_list", join(spec.a_list));
  echo.emplace_back("spec.b_list", join(spec.b_list));
  echo.emplace_back("spec.x", std::to_string(spec.x));
  echo.emplace_back("spec.epsilon", format_double(spec.epsilon));
  echo.emplace_back("spec.dilation", std::to_string(spec.dilation));
  return spec;
}

// Ladder parameters for the comparison and chain subcommands.
struct LadderFlags {
  std::optional<unsigned> w;
  std::optional<u64> h1, h2, h3, h4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--w", w, "primorial index for W");
    cmd->add_option("--h1", h1, "small prime window start");
    cmd->add_option("--h2", h2, "small prime window end");
    cmd->add_option("--h3", h3, "large window start");
    cmd->add_option("--h4", h4, "large window end");
  }
};

CompareSpec resolve_ladder(const GlobalOptions& g, const LadderFlags& f,
                           u64 dilation, ConfigEcho& echo) {
  CompareSpec cs;
  cs.w = f.w ? *f.w : static_cast<unsigned>(g.cfg.get_u64("ladder.w", 3));
  cs.h1 = f.h1 ? *f.h1 : g.cfg.get_u64("ladder.h1", 16);
  cs.h2 = f.h2 ? *f.h2 : g.cfg.get_u64("ladder.h2", 64);
  cs.h3 = f.h3 ? *f.h3 : g.cfg.get_u64("ladder.h3", 256);
  cs.h4 = f.h4 ? *f.h4 : g.cfg.get_u64("ladder.h4", 4096);
  cs.h_minus = cs.h1;
  cs.h_plus = cs.h2;
  cs.dilation = dilation;
  cs.validate();
  echo.emplace_back("ladder.w", std::to_string(cs.w));
  echo.emplace_back("ladder.h1", std::to_string(cs.h1));
  echo.emplace_back("ladder.h2", std::to_string(cs.h2));
  echo.emplace_back("ladder.h3", std::to_string(cs.h3));
  echo.emplace_back("ladder.h4", std::to_string(cs.h4));
  return cs;
}

u64 to_u64_or_throw(u128 v, const std::string& what) {
  if (v > std::numeric_limits<u64>::max())
    throw std::overflow_error(what + " exceeds the 64-bit range");
  return static_cast<u64>(v);
}

// Largest sieve index read when every slot dilation stays at or below
// max_dilation (the base spec's own dilation already included by caller).
u64 slot_sieve_limit(const CorrelationSpec& spec, u64 max_dilation) {
  u128 req = 0;
  for (unsigned i = 0; i < spec.k(); ++i) {
    const u128 ax = static_cast<u128>(spec.a_list[i]) * spec.x;
    const u64 babs = static_cast<u64>(
        spec.b_list[i] < 0 ? -spec.b_list[i] : spec.b_list[i]);
    req = std::max(req, ax + static_cast<u128>(max_dilation) * babs);
  }
  return to_u64_or_throw(req + 1, "sieve requirement");
}

void echo_common(const GlobalOptions& g, const std::string& fmt,
                 ConfigEcho& echo) {
  echo.emplace_back("threads", std::to_string(g.threads));
  echo.emplace_back("output.format", fmt);
}

// ---------------------------------------------------------------------------
// Self-contained invariant suite for the selftest subcommand.

void selftest_sieve_oracle(const SieveTable& table) {
  auto oracle = [](u64 n) {
    unsigned omega = 0;
    bool squarefree = true;
    u64 m = n, first = 0;
    unsigned distinct = 0;
    for (u64 p = 2; p * p <= m; ++p)
      if (m % p == 0) {
        ++distinct;
        first = first ? first : p;
        unsigned e = 0;
        while (m % p == 0) m /= p, ++e;
        omega += e;
        if (e > 1) squarefree = false;
      }
    if (m > 1) ++omega, ++distinct, first = first ? first : m;
    return std::tuple{omega, squarefree, distinct, first};
  };
  CounterRng rng(41);
  for (int t = 0; t < 2000; ++t) {
    const u64 n = 2 + rng.below(2 * t, 999998);
    const auto [omega, squarefree, distinct, first] = oracle(n);
    if (table.omega(n) != omega)
      throw std::runtime_error("omega mismatch at " + std::to_string(n));
    const int lam = (omega % 2 == 0) ? 1 : -1;
    if (table.liouville(n) != lam)
      throw std::runtime_error("liouville mismatch at " + std::to_string(n));
    const int mu = squarefree ? ((omega % 2 == 0) ? 1 : -1) : 0;
    if (table.mobius(n) != mu)
      throw std::runtime_error("mobius mismatch at " + std::to_string(n));
    const double lam_vm = (distinct == 1) ? std::log(double(first)) : 0.0;
    if (table.von_mangoldt(n) != lam_vm)
      throw std::runtime_error("von Mangoldt mismatch at " +
                               std::to_string(n));
  }
}

void selftest_multiplicativity(const SieveTable& table) {
  CounterRng rng(42);
  for (int t = 0; t < 2000; ++t) {
    const u64 m = 1 + rng.below(2 * t, 1000);
    const u64 n = 1 + rng.below(2 * t + 1, 1000);
    if (table.liouville(m * n) != table.liouville(m) * table.liouville(n))
      throw std::runtime_error("multiplicativity fails at " +
                               std::to_string(m) + " * " + std::to_string(n));
  }
}

void selftest_duplicate_pair(const SieveTable& table, unsigned threads) {
  CorrelationSpec spec;
  spec.a_list = {1, 1};
  spec.b_list = {0, 0};
  spec.x = 100000;
  const auto avg = log_correlation(table, spec, threads);
  if (avg.value != 1.0)
    throw std::runtime_error("duplicated-pair average is " +
                             format_double(avg.value) + ", expected 1");
}

void selftest_change_of_variables(const SieveTable& table) {
  CorrelationSpec spec;
  spec.a_list = {1};
  spec.b_list = {0};
  spec.x = 10000;
  const auto r = change_of_variables_check(table, spec, 7);
  if (!r.exact_match)
    throw std::runtime_error("prime change of variables is not exact");
}

void selftest_afe_degenerate(const SieveTable& table, unsigned threads) {
  CorrelationSpec spec;
  spec.a_list = {1, 1};
  spec.b_list = {0, 0};
  spec.x = 10000;
  const auto rep = afe_scan(table, spec, 3, 5, 0.5, threads);
  for (const auto& row : rep.rows)
    if (row.deviation != 0.0)
      throw std::runtime_error("degenerate dyadic deviation nonzero at m = " +
                               std::to_string(row.m));
}

void selftest_gowers_monotone() {
  for (int t = 0; t < 10; ++t) {
    CounterRng rng(500 + t);
    std::vector<double> v(32);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = rng.below(i, 2) ? 1.0 : -1.0;
    const CyclicSignal f(v);
    const double u1 = gowers_norm_cyclic(f, 1);
    const double u2 = gowers_norm_cyclic(f, 2);
    const double u3 = gowers_norm_cyclic(f, 3);
    if (!(u1 <= u2 + 1e-12 && u2 <= u3 + 1e-12))
      throw std::runtime_error("norm monotonicity fails on trial " +
                               std::to_string(t));
  }
  const CyclicSignal ones(std::vector<double>(17, 1.0));
  for (unsigned k = 1; k <= 3; ++k)
    if (std::abs(gowers_norm_cyclic(ones, k) - 1.0) > 1e-12)
      throw std::runtime_error("constant signal norm is not 1");
}

void selftest_gowers_fft() {
  for (int t = 0; t < 5; ++t) {
    CounterRng rng(900 + t);
    std::vector<cdouble> v(64);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = cdouble(2.0 * rng.uniform01(2 * i) - 1.0,
                     2.0 * rng.uniform01(2 * i + 1) - 1.0);
    const CyclicSignal f(v);
    if (std::abs(gowers_u2_fft(f) - gowers_norm_cyclic(f, 2)) > 1e-10)
      throw std::runtime_error("fft norm disagrees with recursion");
  }
}

void selftest_gcs() {
  for (int t = 0; t < 5; ++t) {
    CounterRng rng(1300 + t);
    std::vector<cdouble> th(16), p0(16), p1(16);
    for (std::size_t i = 0; i < 16; ++i) {
      th[i] = rng.below(3 * i, 2) ? 1.0 : -1.0;
      p0[i] = rng.below(3 * i + 1, 2) ? 1.0 : -1.0;
      p1[i] = rng.below(3 * i + 2, 2) ? 1.0 : -1.0;
    }
    const auto r = gcs_check(CyclicSignal(th),
                             {CyclicSignal(p0), CyclicSignal(p1)},
                             {LinearForm{{0, 1}}, LinearForm{{1, 0}}});
    if (!r.passed)
      throw std::runtime_error("box inequality fails on trial " +
                               std::to_string(t));
  }
}

void selftest_entropy_identities() {
  CounterRng rng(1700);
  JointDistribution d;
  d.arity = 2;
  double total = 0.0;
  std::vector<double> w;
  for (u64 a = 0; a < 4; ++a)
    for (u64 b = 0; b < 5; ++b) {
      d.labels.push_back(a);
      d.labels.push_back(b);
      w.push_back(0.05 + rng.uniform01(a * 5 + b));
      total += w.back();
    }
  for (double v : w) d.probs.push_back(v / total);
  const double direct = mutual_information(d, {0}, {1});
  const double sym =
      entropy_of(d, {0}) + entropy_of(d, {1}) - entropy(d);
  if (std::abs(direct - sym) > 1e-10)
    throw std::runtime_error("information formulas disagree");
  const double chain = conditional_entropy(d, {0}, {1}) + entropy_of(d, {1});
  if (std::abs(chain - entropy(d)) > 1e-10)
    throw std::runtime_error("entropy chain rule fails");
}

void selftest_decrement_identity(const SieveTable& table) {
  const std::vector<u64> a = {1}, b = {0};
  const auto rep = decrement_report(table, a, b, 1, 100000, 0.5, 1, 2);
  for (const auto& row : rep.rows)
    if (row.identity_residual > 1e-10)
      throw std::runtime_error("decrement identity residual " +
                               format_double(row.identity_residual) +
                               " at m = " + std::to_string(row.m));
  const auto dist = log_distribution(100000, 0.5);
  const auto ctx = make_decrement_context(table, a, b, 1, 1, 100000);
  const auto law = sample_X_Y(ctx, dist, table);
  const double via_law = law_average_F(law);
  const double direct = direct_average_Z(ctx, dist, table);
  if (std::abs(via_law - direct) > 1e-10)
    throw std::runtime_error("law average disagrees with direct pass");
}

void selftest_hoeffding(const SieveTable& table) {
  const auto ctx = make_decrement_context(table, {1}, {0}, 1, 4, 100000);
  const std::vector<int> pattern(ctx.pattern_bits(), 1);
  const auto r = hoeffding_tail_check(ctx, pattern, 13.0, 2000, 1);
  if (!r.exact_mean_zero)
    throw std::runtime_error("per-term means are not exactly zero");
  if (r.empirical_tail != 0.0)
    throw std::runtime_error("tail beyond the hard bound is nonempty");
}

void selftest_report_determinism(const SieveTable& table, unsigned threads) {
  CorrelationSpec spec;
  spec.a_list = {1};
  spec.b_list = {0};
  spec.x = 10000;
  const auto rep = afe_scan(table, spec, 3, 4, 0.5, threads);
  const std::string banner = version_banner(&table, 7);
  const ConfigEcho echo = {{"spec.x", "10000"}};
  if (afe_report_json(rep, banner, echo) != afe_report_json(rep, banner, echo))
    throw std::runtime_error("report emission is not reproducible");
  CounterRng rng(2300);
  for (int t = 0; t < 1000; ++t) {
    const double v = (rng.uniform01(2 * t) - 0.5) *
                     std::pow(10.0, double(rng.below(2 * t + 1, 40)) - 20.0);
    const std::string s = format_double(v);
    if (std::strtod(s.c_str(), nullptr) != v)
      throw std::runtime_error("decimal round trip fails for " + s);
  }
}

int run_selftest(const GlobalOptions& g) {
  const SieveTable table = acquire_sieve(1100000, g);
  struct Check {
    const char* name;
    std::function<void()> fn;
  };
  const unsigned threads = g.threads;
  const std::vector<Check> checks = {
      {"sieve_oracle", [&] { selftest_sieve_oracle(table); }},
      {"multiplicativity", [&] { selftest_multiplicativity(table); }},
      {"duplicate_pair", [&] { selftest_duplicate_pair(table, threads); }},
      {"change_of_variables", [&] { selftest_change_of_variables(table); }},
      {"afe_degenerate", [&] { selftest_afe_degenerate(table, threads); }},
      {"gowers_monotone", selftest_gowers_monotone},
      {"gowers_fft", selftest_gowers_fft},
      {"box_inequality", selftest_gcs},
      {"entropy_identities", selftest_entropy_identities},
      {"decrement_identity", [&] { selftest_decrement_identity(table); }},
      {"hoeffding", [&] { selftest_hoeffding(table); }},
      {"report_determinism",
       [&] { selftest_report_determinism(table, threads); }},
  };
  for (const auto& c : checks) {
    try {
      c.fn();
      note(std::string("ok ") + c.name);
    } catch (const std::exception& e) {
      note(std::string("FAIL ") + c.name + ": " + e.what());
      throw std::runtime_error(std::string("selftest failed: ") + c.name);
    }
  }
  const std::string banner = version_banner(&table, std::nullopt);
  std::cout << "{\"selftest\":\"pass\",\"checks\":" << checks.size()
            << ",\"banner\":\"" << json_escape(banner) << "\"}" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOptions g;
  if (const char* env = std::getenv("CHOWLA_SIEVE_CACHE")) g.sieve_cache = env;
  bool cfg_loaded = false;
  const auto ensure_config = [&] {
    if (!cfg_loaded) {
      if (!g.config_path.empty()) g.cfg = load_config(g.config_path);
      cfg_loaded = true;
    }
  };

  CLI::App app{
      "multiplicative-sign correlation toolkit\n"
      "Parameter precedence: command-line flags override config-file values, "
      "which override built-in defaults."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--threads", g.threads, "worker thread cap")
      ->check(CLI::Range(1u, 256u));
  app.add_option("--sieve-cache", g.sieve_cache,
                 "sieve cache file (default: env CHOWLA_SIEVE_CACHE)");
  app.add_option("--output-dir", g.output_dir,
                 "also write the report under this directory");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // sieve ------------------------------------------------------------------
  auto* cmd_sieve = app.add_subcommand("sieve", "build the factor table");
  std::optional<u64> sieve_limit;
  cmd_sieve->add_option("--limit", sieve_limit, "table limit");
  cmd_sieve->callback([&] {
    ensure_config();
    const u64 limit =
        sieve_limit ? *sieve_limit : g.cfg.get_u64("sieve.limit", 1000000);
    const std::string fmt = g.pick_format("json");
    ConfigEcho echo = {{"sieve.limit", std::to_string(limit)}};
    echo_common(g, fmt, echo);
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    if (fmt == "json") {
      emit(g, "sieve", fmt, sieve_summary_json(table, banner, echo));
    } else {
      std::string out = chowla::detail::csv_preamble(banner, echo);
      out += "limit,fingerprint\n";
      out += std::to_string(table.limit()) + "," +
             hex_u64(table.fingerprint()) + "\n";
      emit(g, "sieve", fmt, out);
    }
  });

  // correlate ----------------------------------------------------------------
  auto* cmd_corr = app.add_subcommand(
      "correlate", "logarithmically averaged sign correlation");
  SpecFlags corr_flags;
  corr_flags.attach(cmd_corr);
  cmd_corr->callback([&] {
    ensure_config();
    ConfigEcho echo;
    const CorrelationSpec spec = resolve_spec(g, corr_flags, echo);
    const std::string fmt = g.pick_format("csv");
    echo_common(g, fmt, echo);
    const u64 limit = std::max(g.cfg.get_u64("sieve.limit", 0),
                               spec.required_limit());
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    const LogAverage avg = log_correlation(table, spec, g.threads);
    emit(g, "correlate", fmt,
         fmt == "csv" ? correlation_csv(spec, avg, banner, echo)
                      : correlation_json(spec, avg, banner, echo));
  });

  // afe ----------------------------------------------------------------------
  auto* cmd_afe = app.add_subcommand(
      "afe", "dyadic prime-block deviations from the sign flip");
  SpecFlags afe_flags;
  afe_flags.attach(cmd_afe);
  std::optional<unsigned> afe_mlo, afe_mhi;
  cmd_afe->add_option("--m-lo", afe_mlo, "first dyadic block");
  cmd_afe->add_option("--m-hi", afe_mhi, "last dyadic block");
  cmd_afe->callback([&] {
    ensure_config();
    ConfigEcho echo;
    const CorrelationSpec spec = resolve_spec(g, afe_flags, echo);
    const unsigned m_lo = afe_mlo ? *afe_mlo : 3;
    const unsigned m_hi = afe_mhi ? *afe_mhi : 6;
    echo.emplace_back("afe.m_lo", std::to_string(m_lo));
    echo.emplace_back("afe.m_hi", std::to_string(m_hi));
    const std::string fmt = g.pick_format("json");
    echo_common(g, fmt, echo);
    if (m_hi >= 63) throw std::invalid_argument("m-hi is out of range");
    const u64 max_dilation =
        to_u64_or_throw(static_cast<u128>(spec.dilation) << (m_hi + 1),
                        "largest dilated prime");
    const u64 limit = std::max(g.cfg.get_u64("sieve.limit", 0),
                               slot_sieve_limit(spec, max_dilation));
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    const AfeReport rep =
        afe_scan(table, spec, m_lo, m_hi, spec.epsilon, g.threads);
    emit(g, "afe", fmt,
         fmt == "json" ? afe_report_json(rep, banner, echo)
                       : afe_report_csv(rep, banner, echo));
  });

  // compare --------------------------------------------------------------
  auto* cmd_cmp = app.add_subcommand(
      "compare", "prime blocks versus W-coprime integer blocks");
  SpecFlags cmp_flags;
  LadderFlags cmp_ladder;
  cmp_flags.attach(cmd_cmp);
  cmp_ladder.attach(cmd_cmp);
  cmd_cmp->callback([&] {
    ensure_config();
    ConfigEcho echo;
    const CorrelationSpec spec = resolve_spec(g, cmp_flags, echo);
    const CompareSpec cs = resolve_ladder(g, cmp_ladder, spec.dilation, echo);
    const std::string fmt = g.pick_format("json");
    echo_common(g, fmt, echo);
    const u64 max_dilation =
        to_u64_or_throw(static_cast<u128>(spec.dilation) * 2 * cs.h2,
                        "largest dilated block entry");
    const u64 limit =
        std::max({g.cfg.get_u64("sieve.limit", 0),
                  slot_sieve_limit(spec, max_dilation), cs.h4 + 1});
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    std::vector<CompareRow> rows;
    for (unsigned m = 1; m < 63; ++m) {
      const u64 two_m = u64{1} << m;
      if (two_m < cs.h_minus || two_m > cs.h_plus) continue;
      rows.push_back(
          {m, compare_primes_vs_coprime(table, spec, cs, m, g.threads)});
    }
    emit(g, "compare", fmt,
         fmt == "json"
             ? compare_report_json(cs, spec.x, spec.k(), rows, banner, echo)
             : compare_report_csv(rows, banner, echo));
  });

  // chain ------------------------------------------------------------------
  auto* cmd_chain = app.add_subcommand(
      "chain", "full reduction chain at one parameter ladder");
  SpecFlags chain_flags;
  LadderFlags chain_ladder;
  chain_flags.attach(cmd_chain);
  chain_ladder.attach(cmd_chain);
  cmd_chain->callback([&] {
    ensure_config();
    ConfigEcho echo;
    const CorrelationSpec spec = resolve_spec(g, chain_flags, echo);
    const CompareSpec cs = resolve_ladder(g, chain_ladder, spec.dilation, echo);
    const std::string fmt = g.pick_format("json");
    echo_common(g, fmt, echo);
    const u64 max_dilation =
        to_u64_or_throw(static_cast<u128>(cs.h2) * cs.h4, "largest semiprime");
    const u64 limit =
        std::max({g.cfg.get_u64("sieve.limit", 0),
                  slot_sieve_limit(spec, max_dilation), cs.h4 + 1});
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    const ChainReport rep = chain_report(table, spec, cs, g.threads);
    emit(g, "chain", fmt,
         fmt == "json" ? chain_report_json(rep, banner, echo)
                       : chain_report_csv(rep, banner, echo));
  });

  // gowers -----------------------------------------------------------------
  auto* cmd_gowers = app.add_subcommand(
      "gowers", "uniformity norms of the recentred prime indicator");
  std::optional<unsigned> gow_k;
  std::optional<u64> gow_n;
  std::optional<std::string> gow_wlist;
  std::string gow_mode = "interval";
  cmd_gowers->add_option("--k", gow_k, "norm order");
  cmd_gowers->add_option("--n", gow_n, "window length");
  cmd_gowers->add_option("--w-list", gow_wlist, "comma-separated w values");
  cmd_gowers->add_option("--mode", gow_mode, "cyclic or interval")
      ->check(CLI::IsMember({"cyclic", "interval"}));
  auto run_gowers = [&](const char* name, std::vector<u64> default_w,
                        unsigned default_k) {
    ConfigEcho echo;
    const unsigned k =
        gow_k ? *gow_k
              : static_cast<unsigned>(g.cfg.get_u64("gowers.k", default_k));
    const u64 n = gow_n ? *gow_n : g.cfg.get_u64("gowers.n", 10000);
    const std::vector<u64> w_list =
        gow_wlist ? parse_u64_list(*gow_wlist, "--w-list")
                  : g.cfg.get_u64_list("gowers.w_list", default_w);
    auto join = [](const std::vector<u64>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
      return s;
    };
    echo.emplace_back("gowers.k", std::to_string(k));
    echo.emplace_back("gowers.n", std::to_string(n));
    echo.emplace_back("gowers.w_list", join(w_list));
    echo.emplace_back("gowers.mode", gow_mode);
    const std::string fmt = g.pick_format("csv");
    echo_common(g, fmt, echo);
    if (w_list.empty()) throw std::invalid_argument("w list is empty");
    std::vector<unsigned> w_small;
    u64 w_max = 0;
    for (u64 w : w_list) {
      if (w < 2 || w > 50)
        throw std::invalid_argument("w values must lie in [2, 50]");
      w_small.push_back(static_cast<unsigned>(w));
      w_max = std::max(w_max, w);
    }
    const u64 wbig = primorial(static_cast<unsigned>(w_max));
    const u64 limit =
        std::max(g.cfg.get_u64("sieve.limit", 0),
                 to_u64_or_throw(static_cast<u128>(wbig) * n + wbig,
                                 "scan endpoint"));
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, std::nullopt);
    std::vector<UniformityRow> rows;
    if (gow_mode == "interval") {
      rows = uniformity_scan(table, w_small, k, n);
    } else {
      for (unsigned w : w_small) {
        const u64 W = primorial(w);
        for (u64 b = 1; b <= W; ++b) {
          if (std::gcd(b, W) != 1) continue;
          std::vector<double> vals(n);
          for (u64 j = 1; j <= n; ++j)
            vals[j - 1] = w_tricked_von_mangoldt(table, b, W, j) - 1.0;
          const CyclicSignal f(vals);
          rows.push_back(
              {w, b, k, n,
               k == 2 ? gowers_u2_fft(f) : gowers_norm_cyclic(f, k)});
        }
      }
    }
    for (u64 w : w_list) {
      double mean = 0.0;
      u64 count = 0;
      for (const auto& r : rows)
        if (r.w == w) mean += r.norm, ++count;
      if (count) note("w = " + std::to_string(w) + ": mean norm " +
                      format_double(mean / double(count)) + " over " +
                      std::to_string(count) + " residues");
    }
    emit(g, name, fmt,
         fmt == "csv" ? uniformity_csv(rows, banner, echo)
                      : uniformity_json(rows, banner, echo));
  };
  cmd_gowers->callback([&] {
    ensure_config();
    run_gowers("gowers", {2}, 2);
  });

  // uniformity ---------------------------------------------------------------
  auto* cmd_unif = app.add_subcommand(
      "uniformity", "norm scan across increasing primorial levels");
  cmd_unif->add_option("--k", gow_k, "norm order");
  cmd_unif->add_option("--n", gow_n, "window length");
  cmd_unif->add_option("--w-list", gow_wlist, "comma-separated w values");
  cmd_unif->callback([&] {
    ensure_config();
    gow_mode = "interval";
    run_gowers("uniformity", {2, 3, 5, 7}, 2);
  });

  // entropy ------------------------------------------------------------------
  auto* cmd_ent = app.add_subcommand(
      "entropy", "sign-pattern entropy decrement across dyadic prime blocks");
  SpecFlags ent_flags;
  ent_flags.attach(cmd_ent);
  std::optional<unsigned> ent_mlo, ent_mhi;
  std::optional<u64> ent_seed, ent_trials;
  bool ent_surrogate = false;
  cmd_ent->add_option("--m-lo", ent_mlo, "first dyadic block");
  cmd_ent->add_option("--m-hi", ent_mhi, "last dyadic block");
  cmd_ent->add_option("--seed", ent_seed, "RNG seed");
  cmd_ent->add_option("--trials", ent_trials,
                      "Monte Carlo draws (0 enumerates exactly)");
  cmd_ent->add_flag("--surrogate", ent_surrogate,
                    "replace the sign sequence by counter-mode noise");
  cmd_ent->callback([&] {
    ensure_config();
    ConfigEcho echo;
    const CorrelationSpec spec = resolve_spec(g, ent_flags, echo);
    std::vector<u64> b_unsigned;
    for (i64 b : spec.b_list) {
      if (b < 0)
        throw std::invalid_argument(
            "entropy mode needs nonnegative shifts in spec.b_list");
      b_unsigned.push_back(static_cast<u64>(b));
    }
    const unsigned m_lo =
        ent_mlo ? *ent_mlo
                : static_cast<unsigned>(g.cfg.get_u64("entropy.m_lo", 1));
    const unsigned m_hi =
        ent_mhi ? *ent_mhi
                : static_cast<unsigned>(g.cfg.get_u64("entropy.m_hi", 3));
    const u64 seed = ent_seed ? *ent_seed : g.cfg.get_u64("entropy.seed", 0);
    const u64 trials =
        ent_trials ? *ent_trials : g.cfg.get_u64("entropy.trials", 0);
    echo.emplace_back("entropy.m_lo", std::to_string(m_lo));
    echo.emplace_back("entropy.m_hi", std::to_string(m_hi));
    echo.emplace_back("entropy.seed", std::to_string(seed));
    echo.emplace_back("entropy.trials", std::to_string(trials));
    echo.emplace_back("entropy.surrogate", ent_surrogate ? "1" : "0");
    const std::string fmt = g.pick_format("json");
    echo_common(g, fmt, echo);
    if (m_hi >= 62) throw std::invalid_argument("m-hi is out of range");
    u64 b_max = 0;
    for (u64 b : b_unsigned) b_max = std::max(b_max, b);
    u128 req = 0;
    for (u64 a : spec.a_list) {
      const u128 per_slot = static_cast<u128>(2) * spec.dilation * b_max + 1;
      req = std::max(req, static_cast<u128>(a) * spec.x +
                              per_slot * a * (u64{1} << m_hi));
    }
    const u64 limit = std::max(g.cfg.get_u64("sieve.limit", 0),
                               to_u64_or_throw(req + 1, "pattern endpoint"));
    const SieveTable table = acquire_sieve(limit, g);
    const std::string banner = version_banner(&table, seed);
    const DecrementReport rep = decrement_report(
        table, spec.a_list, b_unsigned, spec.dilation, spec.x, spec.epsilon,
        m_lo, m_hi,
        ent_surrogate ? SignSource::kCounterSigns : SignSource::kLiouville,
        seed, trials);
    emit(g, "entropy", fmt,
         fmt == "json" ? decrement_report_json(rep, banner, echo)
                       : decrement_report_csv(rep, banner, echo));
  });

  // selftest -----------------------------------------------------------------
  auto* cmd_self = app.add_subcommand(
      "selftest", "run the built-in invariant suite");
  cmd_self->callback([&] {
    ensure_config();
    run_selftest(g);
  });

  // Let global flags appear after the subcommand as well.
  for (CLI::App* sc : app.get_subcommands([](CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const resource_error& e) {
    std::cerr << "resource error: " << e.what() << std::endl;
    return 3;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource error: out of memory" << std::endl;
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "assertion failure: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
