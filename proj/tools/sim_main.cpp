// Scenario runner: executes scenario files, applies the correctness
// checkers, and optionally exports replayable traces.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "avss/simnet.hpp"

using namespace avss::simnet;

namespace {

// Every f-sized subset of replicas, for the privacy sweep.
std::vector<std::vector<std::uint32_t>> subsets(std::uint32_t n,
                                                std::uint32_t f) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur;
  std::function<void(std::uint32_t)> rec = [&](std::uint32_t start) {
    if (cur.size() == f) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic kvstore protocol simulator"};
  std::vector<std::string> files;
  std::string trace_dir;
  bool privacy = false;
  bool quiet = false;
  app.add_option("scenarios", files, "scenario files to run")->required();
  app.add_option("--trace-dir", trace_dir, "export traces to this directory");
  app.add_flag("--privacy", privacy,
               "also run the privacy checker over every f-subset");
  app.add_flag("-q,--quiet", quiet, "only print failures and the summary");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const std::string& path : files) {
    auto s = Scenario::load(path);
    if (!s) {
      std::cerr << path << ": cannot parse scenario\n";
      ++failures;
      continue;
    }
    RunResult r;
    try {
      r = run_scenario(*s);
    } catch (const std::exception& e) {
      std::cerr << s->name << ": rejected: " << e.what() << "\n";
      ++failures;
      continue;
    }
    std::vector<std::string> problems;
    if (!r.all_completed) problems.push_back("incomplete client ops");
    if (!r.store_digests_equal) problems.push_back("store digests diverge");
    if (r.max_pending > s->window) problems.push_back("window exceeded");
    auto lin = check_linearizability(r.trace);
    if (!lin.pass) problems.push_back("linearizability: " + lin.detail);
    if (privacy) {
      for (const auto& corrupt : subsets(r.n, r.f)) {
        auto v = check_privacy(r, corrupt);
        if (!v.pass) {
          problems.push_back("privacy: " + v.detail);
          break;
        }
      }
    }
    if (!trace_dir.empty()) {
      std::filesystem::create_directories(trace_dir);
      std::ofstream out(trace_dir + "/" + s->name + ".trace");
      out << r.trace.export_lines();
    }
    if (problems.empty()) {
      if (!quiet)
        std::cout << s->name << ": ok (" << r.trace.ops.size() << " ops, "
                  << r.committed << " commits, " << r.ticks_used
                  << " ticks)\n";
    } else {
      ++failures;
      std::cout << s->name << ": FAIL\n";
      for (const std::string& p : problems) std::cout << "  - " << p << "\n";
    }
  }
  std::cout << (failures ? "FAIL" : "PASS") << " (" << files.size()
            << " scenarios, " << failures << " failing)\n";
  return failures ? 1 : 0;
}
