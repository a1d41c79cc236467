#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chowla/decrement.hpp"
#include "chowla/functional_equation.hpp"
#include "chowla/gowers.hpp"
#include "chowla/sieve.hpp"
#include "chowla/util.hpp"
#include "chowla/version.hpp"

namespace chowla {

// Ordered echo of every parameter a run actually used.  Reports embed it so
// an output file alone is enough to rerun the computation.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline std::string hex_u64(u64 v) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (int shift = 60; shift >= 0; shift -= 4)
    out.push_back(digits[(v >> shift) & 0xF]);
  return out;
}

// One line identifying the code version, the sieve contents, and the RNG
// seed, so every artifact states exactly what produced it.
inline std::string version_banner(const SieveTable* table,
                                  std::optional<u64> seed) {
  std::string out = "chowla ";
  out += kVersion;
  if (table) {
    out += "; sieve ";
    out += hex_u64(table->fingerprint());
    out += " limit ";
    out += std::to_string(table->limit());
  } else {
    out += "; sieve none";
  }
  if (seed) {
    out += "; seed ";
    out += std::to_string(*seed);
  } else {
    out += "; seed none";
  }
  return out;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* digits = "0123456789abcdef";
          out += "\\u00";
          out.push_back(digits[(c >> 4) & 0xF]);
          out.push_back(digits[c & 0xF]);
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

namespace detail {

inline std::string json_config_object(const ConfigEcho& config) {
  std::string out = "{";
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) out += ",";
    out += "\"" + json_escape(config[i].first) + "\":\"" +
           json_escape(config[i].second) + "\"";
  }
  out += "}";
  return out;
}

inline std::string csv_preamble(const std::string& banner,
                                const ConfigEcho& config) {
  std::string out = "# " + banner + "\n";
  for (const auto& [k, v] : config) out += "# " + k + " = " + v + "\n";
  return out;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Functional-equation reports.  All three kinds share one JSON envelope:
// theorem tag, parameter object, row array, and the mass of flagged dyadic
// rows (zero when the report kind has none).

inline std::string afe_report_json(const AfeReport& r,
                                   const std::string& banner,
                                   const ConfigEcho& config) {
  std::string out = "{\"theorem\":\"afe\",\"banner\":\"" +
                    json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"params\":{\"k\":" + std::to_string(r.k) +
         ",\"x\":" + std::to_string(r.x) +
         ",\"dilation\":" + std::to_string(r.dilation) +
         ",\"epsilon\":" + format_double(r.epsilon) + "}";
  out += ",\"rows\":[";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const AfeRow& row = r.rows[i];
    if (i) out += ",";
    out += "{\"m\":" + std::to_string(row.m) +
           ",\"prime_count\":" + std::to_string(row.prime_count) +
           ",\"deviation\":" + format_double(row.deviation) +
           ",\"exceptional\":" + (row.exceptional ? "true" : "false") + "}";
  }
  out += "],\"exceptional_mass\":" + format_double(r.exceptional_mass);
  out += ",\"mass_reference\":" + format_double(r.mass_reference) + "}";
  return out;
}

inline std::string afe_report_csv(const AfeReport& r,
                                  const std::string& banner,
                                  const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "m,prime_count,deviation,exceptional\n";
  for (const AfeRow& row : r.rows)
    out += std::to_string(row.m) + "," + std::to_string(row.prime_count) +
           "," + format_double(row.deviation) + "," +
           (row.exceptional ? "1" : "0") + "\n";
  out += "# exceptional_mass = " + format_double(r.exceptional_mass) + "\n";
  return out;
}

struct CompareRow {
  unsigned m = 0;
  CompareResult result;
};

inline std::string compare_report_json(const CompareSpec& cs, u64 x,
                                       unsigned k,
                                       const std::vector<CompareRow>& rows,
                                       const std::string& banner,
                                       const ConfigEcho& config) {
  std::string out = "{\"theorem\":\"compar\",\"banner\":\"" +
                    json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"params\":{\"k\":" + std::to_string(k) +
         ",\"x\":" + std::to_string(x) + ",\"w\":" + std::to_string(cs.w) +
         ",\"h1\":" + std::to_string(cs.h1) +
         ",\"h2\":" + std::to_string(cs.h2) +
         ",\"h3\":" + std::to_string(cs.h3) +
         ",\"h4\":" + std::to_string(cs.h4) + "}";
  out += ",\"rows\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ",";
    out += "{\"m\":" + std::to_string(rows[i].m) +
           ",\"lhs\":" + format_double(rows[i].result.lhs) +
           ",\"rhs\":" + format_double(rows[i].result.rhs) +
           ",\"gap\":" + format_double(rows[i].result.gap) +
           ",\"prime_terms\":" + std::to_string(rows[i].result.prime_terms) +
           ",\"coprime_terms\":" +
           std::to_string(rows[i].result.coprime_terms) + "}";
  }
  out += "],\"exceptional_mass\":0}";
  return out;
}

inline std::string compare_report_csv(const std::vector<CompareRow>& rows,
                                      const std::string& banner,
                                      const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "m,lhs,rhs,gap,prime_terms,coprime_terms\n";
  for (const CompareRow& row : rows)
    out += std::to_string(row.m) + "," + format_double(row.result.lhs) + "," +
           format_double(row.result.rhs) + "," +
           format_double(row.result.gap) + "," +
           std::to_string(row.result.prime_terms) + "," +
           std::to_string(row.result.coprime_terms) + "\n";
  return out;
}

inline std::string chain_report_json(const ChainReport& r,
                                     const std::string& banner,
                                     const ConfigEcho& config) {
  std::string out = "{\"theorem\":\"chain\",\"banner\":\"" +
                    json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"params\":{\"k\":" + std::to_string(r.k) +
         ",\"x\":" + std::to_string(r.x) +
         ",\"w\":" + std::to_string(r.ladder.w) +
         ",\"h1\":" + std::to_string(r.ladder.h1) +
         ",\"h2\":" + std::to_string(r.ladder.h2) +
         ",\"h3\":" + std::to_string(r.ladder.h3) +
         ",\"h4\":" + std::to_string(r.ladder.h4) + "}";
  out += ",\"rows\":[";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i) out += ",";
    out += "{\"name\":\"" + json_escape(r.rows[i].name) +
           "\",\"lhs\":" + format_double(r.rows[i].lhs) +
           ",\"rhs\":" + format_double(r.rows[i].rhs) +
           ",\"residual\":" + format_double(r.rows[i].residual) + "}";
  }
  out += "],\"exceptional_mass\":0";
  out += ",\"headline\":" + format_double(r.headline) + "}";
  return out;
}

inline std::string chain_report_csv(const ChainReport& r,
                                    const std::string& banner,
                                    const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "name,lhs,rhs,residual\n";
  for (const ChainRow& row : r.rows)
    out += row.name + "," + format_double(row.lhs) + "," +
           format_double(row.rhs) + "," + format_double(row.residual) + "\n";
  out += "# headline = " + format_double(r.headline) + "\n";
  return out;
}

// --------------------------------------------------------------------------
// Correlation values and uniformity-norm scans are row data; CSV is their
// native shape.

inline std::string correlation_csv(const CorrelationSpec& spec,
                                   const LogAverage& avg,
                                   const std::string& banner,
                                   const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "k,x,epsilon,dilation,value,numerator,normalizer,terms\n";
  out += std::to_string(spec.k()) + "," + std::to_string(spec.x) + "," +
         format_double(spec.epsilon) + "," + std::to_string(spec.dilation) +
         "," + format_double(avg.value) + "," + format_double(avg.numerator) +
         "," + format_double(avg.normalizer) + "," +
         std::to_string(avg.term_count) + "\n";
  return out;
}

inline std::string correlation_json(const CorrelationSpec& spec,
                                    const LogAverage& avg,
                                    const std::string& banner,
                                    const ConfigEcho& config) {
  std::string out = "{\"theorem\":\"correlation\",\"banner\":\"" +
                    json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"params\":{\"k\":" + std::to_string(spec.k()) +
         ",\"x\":" + std::to_string(spec.x) +
         ",\"epsilon\":" + format_double(spec.epsilon) +
         ",\"dilation\":" + std::to_string(spec.dilation) + "}";
  out += ",\"rows\":[{\"value\":" + format_double(avg.value) +
         ",\"numerator\":" + format_double(avg.numerator) +
         ",\"normalizer\":" + format_double(avg.normalizer) +
         ",\"terms\":" + std::to_string(avg.term_count) + "}]}";
  return out;
}

inline std::string uniformity_csv(const std::vector<UniformityRow>& rows,
                                  const std::string& banner,
                                  const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "w,b,k,n,norm\n";
  for (const UniformityRow& row : rows)
    out += std::to_string(row.w) + "," + std::to_string(row.b) + "," +
           std::to_string(row.norm_order) + "," + std::to_string(row.n) +
           "," + format_double(row.norm) + "\n";
  return out;
}

inline std::string uniformity_json(const std::vector<UniformityRow>& rows,
                                   const std::string& banner,
                                   const ConfigEcho& config) {
  std::string out = "{\"theorem\":\"uniformity\",\"banner\":\"" +
                    json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"rows\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ",";
    out += "{\"w\":" + std::to_string(rows[i].w) +
           ",\"b\":" + std::to_string(rows[i].b) +
           ",\"k\":" + std::to_string(rows[i].norm_order) +
           ",\"n\":" + std::to_string(rows[i].n) +
           ",\"norm\":" + format_double(rows[i].norm) + "}";
  }
  out += "]}";
  return out;
}

// --------------------------------------------------------------------------
// Entropy-decrement report.

inline std::string decrement_report_json(const DecrementReport& r,
                                         const std::string& banner,
                                         const ConfigEcho& config) {
  std::string out = "{\"banner\":\"" + json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"m_rows\":[";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const DecrementRow& row = r.rows[i];
    if (i) out += ",";
    out += "{\"m\":" + std::to_string(row.m) +
           ",\"H_cond\":" + format_double(row.h_cond) +
           ",\"I\":" + format_double(row.information) +
           ",\"scaled_I\":" + format_double(row.scaled_information) +
           ",\"identity_residual\":" + format_double(row.identity_residual) +
           "}";
  }
  out += "],\"cumulative\":" + format_double(r.cumulative);
  out += ",\"H_X1\":" + format_double(r.h_x1);
  out += ",\"seed\":" + std::to_string(r.seed) + "}";
  return out;
}

inline std::string decrement_report_csv(const DecrementReport& r,
                                        const std::string& banner,
                                        const ConfigEcho& config) {
  std::string out = detail::csv_preamble(banner, config);
  out += "m,H_cond,I,scaled_I,identity_residual\n";
  for (const DecrementRow& row : r.rows)
    out += std::to_string(row.m) + "," + format_double(row.h_cond) + "," +
           format_double(row.information) + "," +
           format_double(row.scaled_information) + "," +
           format_double(row.identity_residual) + "\n";
  out += "# cumulative = " + format_double(r.cumulative) + "\n";
  out += "# H_X1 = " + format_double(r.h_x1) + "\n";
  out += "# seed = " + std::to_string(r.seed) + "\n";
  return out;
}

// --------------------------------------------------------------------------
// Sieve summary used by the sieve subcommand.

inline std::string sieve_summary_json(const SieveTable& table,
                                      const std::string& banner,
                                      const ConfigEcho& config) {
  const auto primes = table.primes_in(0, std::min<u64>(table.limit(), 1000));
  std::string out = "{\"banner\":\"" + json_escape(banner) +
                    "\",\"config\":" + detail::json_config_object(config);
  out += ",\"limit\":" + std::to_string(table.limit());
  out += ",\"fingerprint\":\"" + hex_u64(table.fingerprint()) + "\"";
  out += ",\"primes_below_1000\":" + std::to_string(primes.size()) + "}";
  return out;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace chowla
