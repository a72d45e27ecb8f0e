#include "avss/bench.hpp"

#include <doctest.h>

using namespace avss::bench;

namespace {

BenchResult cell(const char* scheme, const char* op, std::uint32_t n,
                 double lat, std::size_t bytes = 100) {
  BenchResult r;
  r.scheme = scheme;
  r.op = op;
  r.n = n;
  r.k = (n - 1) / 3 + 1;
  r.lat_mean_ms = lat;
  r.lat_p10_ms = lat;
  r.lat_std_ms = lat / 10;
  r.throughput = 1000.0 / lat;
  r.share_bytes = bytes;
  r.samples = 40;
  return r;
}

}  // namespace

TEST_CASE("csv emission") {
  CHECK(to_csv({}) ==
        "scheme,op,n,k,throughput_ops_s,latency_mean_ms,latency_std_ms,"
        "share_bytes\n");

  std::vector<BenchResult> rs = {cell("kzg", "share", 4, 10.0, 563),
                                 cell("ped", "verify", 7, 3.0, 883)};
  std::string csv = to_csv(rs);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  auto back = parse_csv(csv);
  REQUIRE(back);
  REQUIRE(back->size() == 2);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK((*back)[i].scheme == rs[i].scheme);
    CHECK((*back)[i].op == rs[i].op);
    CHECK((*back)[i].n == rs[i].n);
    CHECK((*back)[i].k == rs[i].k);
    CHECK((*back)[i].share_bytes == rs[i].share_bytes);
  }

  CHECK_FALSE(parse_csv("wrong,header\n1,2\n"));
  CHECK_FALSE(parse_csv(to_csv({}) + "kzg,share,4\n"));  // short row
}

TEST_CASE("trend checks") {
  auto sweep = [](const char* scheme, const char* op, double l4, double l10,
                  double l16) {
    return std::vector<BenchResult>{cell(scheme, op, 4, l4),
                                    cell(scheme, op, 10, l10),
                                    cell(scheme, op, 16, l16)};
  };

  // The shapes the reference implementation exhibits all pass.
  std::vector<BenchResult> good;
  for (auto& r : sweep("kzg", "share", 5, 30, 90)) good.push_back(r);
  for (auto& r : sweep("kzg", "verify", 50, 49, 51)) good.push_back(r);
  for (auto& r : sweep("ped", "verify", 2.7, 3.1, 3.6)) good.push_back(r);
  for (auto& r : sweep("kzg", "recover_contrib", 1.3, 1.35, 1.3))
    good.push_back(r);
  for (auto& r : sweep("ped", "recover_contrib", 2.6, 2.7, 2.8))
    good.push_back(r);
  CHECK(assert_trends(good).empty());

  // Checker sanity: synthetic constant-time share data must trip the
  // superlinearity assertion.
  auto flat_share = sweep("kzg", "share", 10, 10, 10);
  auto failures = assert_trends(flat_share);
  REQUIRE(failures.size() == 1);
  CHECK(failures[0].find("superlinear") != std::string::npos);

  // Linear-but-not-superlinear share growth also fails (4x over a 4x n span).
  CHECK_FALSE(assert_trends(sweep("kzg", "share", 10, 25, 40)).empty());

  CHECK_FALSE(assert_trends(sweep("kzg", "verify", 50, 80, 120)).empty());
  CHECK_FALSE(assert_trends(sweep("ped", "verify", 3.6, 3.1, 2.7)).empty());
  CHECK_FALSE(
      assert_trends(sweep("ped", "recover_contrib", 1.0, 1.5, 2.5)).empty());

  // Fewer than three cluster sizes: not enough span to judge.
  std::vector<BenchResult> two = {cell("kzg", "share", 4, 10),
                                  cell("kzg", "share", 10, 10)};
  CHECK(assert_trends(two).empty());
}
