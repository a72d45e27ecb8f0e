#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace avss::bench {

// One measured (scheme, op, n) cell. Timing fields vary run to run; the
// identity fields and share_bytes are deterministic in the seed.
struct BenchResult {
  std::string scheme, op;
  std::uint32_t n = 0, k = 0;
  double throughput = 0, lat_mean_ms = 0, lat_std_ms = 0;
  double lat_p10_ms = 0;  // robust to scheduler spikes; drives the trend checks
  std::size_t share_bytes = 0;
  std::size_t samples = 0;
  bool flagged = false;  // could not collect the minimum samples in budget
};

constexpr std::size_t kMinSamples = 30;

// Low-percentile latency: interference only ever adds time, so the cheap
// tail tracks the true cost of fixed-work operations.
double percentile(std::vector<double> v, double q);

// Header `scheme,op,n,k,throughput_ops_s,latency_mean_ms,latency_std_ms,
// share_bytes`, one row per result.
std::string to_csv(const std::vector<BenchResult>& rs);

// Inverse of to_csv for the non-timing fields (timing fields are parsed but
// carry measurement noise). Rejects schema drift.
std::optional<std::vector<BenchResult>> parse_csv(const std::string& text);

// Cost-shape assertions over results spanning >= 3 cluster sizes:
// kzg share superlinear in n, recover_contrib flat (max/min <= 2), kzg
// verify flat, ped verify increasing. Returns one message per violation.
std::vector<std::string> assert_trends(const std::vector<BenchResult>& rs);

}  // namespace avss::bench
