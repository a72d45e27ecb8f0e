#include "avss/bench.hpp"

#include <algorithm>
#include <sstream>

namespace avss::bench {

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::size_t i = std::min(v.size() - 1, (std::size_t)(q * v.size()));
  std::nth_element(v.begin(), v.begin() + i, v.end());
  return v[i];
}

static const char* kHeader =
    "scheme,op,n,k,throughput_ops_s,latency_mean_ms,latency_std_ms,"
    "share_bytes";

std::string to_csv(const std::vector<BenchResult>& rs) {
  std::ostringstream out;
  out << kHeader << "\n";
  for (const auto& r : rs)
    out << r.scheme << "," << r.op << "," << r.n << "," << r.k << ","
        << r.throughput << "," << r.lat_mean_ms << "," << r.lat_std_ms << ","
        << r.share_bytes << "\n";
  return out.str();
}

std::optional<std::vector<BenchResult>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) return std::nullopt;
  std::vector<BenchResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 8) return std::nullopt;
    BenchResult r;
    try {
      r.scheme = fields[0];
      r.op = fields[1];
      r.n = (std::uint32_t)std::stoul(fields[2]);
      r.k = (std::uint32_t)std::stoul(fields[3]);
      r.throughput = std::stod(fields[4]);
      r.lat_mean_ms = std::stod(fields[5]);
      r.lat_std_ms = std::stod(fields[6]);
      r.share_bytes = std::stoul(fields[7]);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> assert_trends(const std::vector<BenchResult>& rs) {
  std::vector<std::string> failures;
  std::map<std::pair<std::string, std::string>, std::map<std::uint32_t, double>>
      by;
  // Fall back to the mean when the robust estimate is absent (parsed CSV).
  for (const auto& r : rs)
    by[{r.scheme, r.op}][r.n] =
        r.lat_p10_ms > 0 ? r.lat_p10_ms : r.lat_mean_ms;
  auto spread = [](const std::map<std::uint32_t, double>& m) {
    double lo = m.begin()->second, hi = lo;
    for (const auto& [n, v] : m) lo = std::min(lo, v), hi = std::max(hi, v);
    return hi / lo;
  };
  for (const auto& [key, m] : by) {
    const auto& [scheme, op] = key;
    if (m.size() < 3) continue;
    std::string tag = scheme + " " + op;
    if (op == "share" && scheme == "kzg") {
      // Superlinear: cost grows faster than n itself. Witness computation is
      // n shares each costing O(k) group operations. (Pedersen's quadratic
      // term is field-only and invisible under its linear group work at
      // these sizes, so the check is scoped to kzg.)
      double n_lo = m.begin()->first, n_hi = m.rbegin()->first;
      double ratio = m.rbegin()->second / m.begin()->second;
      if (ratio <= n_hi / n_lo)
        failures.push_back(tag + ": share cost not superlinear in n (x" +
                           std::to_string(ratio) + ")");
    } else if (op == "recover_contrib") {
      if (spread(m) > 2.0)
        failures.push_back(tag + ": recover_contrib cost not flat in n");
    } else if (op == "verify" && scheme == "kzg") {
      if (spread(m) > 2.0)
        failures.push_back(tag + ": verify cost not flat in n");
    } else if (op == "verify" && scheme == "ped") {
      double prev = -1;
      bool bad = false;
      for (const auto& [n, v] : m) {
        if (v <= prev) bad = true;
        prev = v;
      }
      if (bad) failures.push_back(tag + ": verify cost not increasing in n");
    }
  }
  return failures;
}

}  // namespace avss::bench
