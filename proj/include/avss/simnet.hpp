#pragma once

#include <set>

#include "avss/kvstore.hpp"

namespace avss::simnet {

using namespace avss::algebra;
using avss::kvstore::Message;
using avss::savss::CommitmentVec;
using avss::savss::SavssParams;
using avss::vss::Scheme;

struct ClientOp {
  enum class Kind { Put, Get, AclSet };
  Kind kind = Kind::Put;
  std::uint32_t client = 0;
  std::string key;
  std::vector<std::uint32_t> acl;  // AclSet payload
  std::uint64_t not_before = 0;    // earliest issue tick
};

struct FaultSpec {
  enum class Kind {
    Crash,
    ByzantineDealer,  // dealer pins a masking value off the DPRF for one index
    DropShare,        // dealer withholds one replica's private half
    EquivocateLeader,
    GarbageReply,
    Partition,
  };
  Kind kind = Kind::Crash;
  std::uint32_t replica = 0;  // crash/equivocate/garbage/partition target,
                              // or the index hit by byzantine-dealer/drop-share
  std::uint64_t at = 0;
  std::uint64_t until = 0;  // partition end
  std::uint32_t client = 0;  // byzantine-dealer / drop-share dealer
  std::string key;           // byzantine-dealer / drop-share key
};

// Parsed from a line-oriented text file; see scenarios/ for the schema.
struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  std::uint32_t f = 1;
  Scheme scheme = Scheme::Pedersen;
  std::uint64_t delta = 4;       // max extra message delay
  bool sharing = true;
  std::uint64_t duration = 20000;
  std::uint64_t checkpoint = 64;  // consensus seqs per checkpoint
  std::uint32_t window = 128;
  std::vector<std::uint32_t> corrupt;  // passive adversary's replicas
  std::vector<ClientOp> ops;
  std::vector<FaultSpec> faults;

  std::uint32_t n() const { return 3 * f + 1; }
  std::uint32_t k() const { return f + 1; }
  static std::optional<Scenario> parse(const std::string& text);
  static std::optional<Scenario> load(const std::string& path);
};

struct OpRecord {
  ClientOp op;
  std::uint64_t invoke = 0;
  std::uint64_t complete = 0;  // 0 = never completed
  enum class Result { None, Ok, Value, Denied, Missing } result = Result::None;
  std::optional<Fr> put_value;  // value dealt by a Put
  std::optional<Fr> got;        // value observed by a Get
};

struct MsgRecord {
  std::uint64_t tick = 0;
  std::uint32_t src = 0, dst = 0;
  Message msg;
};

struct Trace {
  std::vector<OpRecord> ops;
  std::vector<MsgRecord> messages;
  std::vector<std::string> notes;
  std::string export_lines() const;  // replay-stable textual form
};

// Everything the checkers need beyond the raw trace.
struct RunResult {
  Trace trace;
  std::uint32_t n = 0, f = 0, k = 0;
  bool all_completed = false;   // every client op finished
  std::uint64_t committed = 0;  // max commits observed at any honest replica
  std::uint64_t ticks_used = 0;
  std::uint64_t max_pending = 0;  // peak pending-log length (window bound)
  bool store_digests_equal = false;
  std::vector<Digest> dealer_faults;
  std::map<std::string, Fr> exposed;  // from an honest replica's store
  // Public context for the privacy checker.
  std::map<std::uint32_t, SavssParams> client_params;
  std::map<std::string, std::uint32_t> key_owner;
  std::map<std::string, CommitmentVec> key_commitment;
};

// Deterministic in (scenario contents); throws std::invalid_argument when the
// scenario oversteps the fault budget.
RunResult run_scenario(const Scenario& s);

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Per-key atomic check of the client-visible history (value register plus
// owner-controlled ACL), exhaustive over linearization orders.
Verdict check_linearizability(const Trace& t);

// Assembles the adversary's view (messages touching `corrupt`) and asserts
// it holds < k verifying dealt slot-0 shares of every protected key, and
// that reconstruction from the view fails.
Verdict check_privacy(const RunResult& r,
                      const std::vector<std::uint32_t>& corrupt);

}  // namespace avss::simnet
