#pragma once

#include <deque>
#include <variant>

#include "avss/codec.hpp"
#include "avss/savss.hpp"

namespace avss::kvstore {

using namespace avss::algebra;
using avss::savss::CommitmentVec;
using avss::savss::DealerFaultEvidence;
using avss::savss::RecoveryShare;
using avss::savss::SavssParams;
using avss::savss::ShareVec;
using avss::vss::Scheme;
using avss::vss::VssShare;

// ---------------------------------------------------------------------------
// Requests (the unit of consensus ordering)
// ---------------------------------------------------------------------------

struct Request {
  enum class Kind : std::uint8_t { Put = 0, Get = 1, AclSet = 2 };
  Kind kind = Kind::Put;
  std::string key;
  std::uint32_t client = 0;
  std::uint64_t reqseq = 0;  // client-local sequence number
  // Put: public half of the two-part write.
  CommitmentVec commitment;
  // Put without sharing (baseline mode): the value travels in the clear.
  std::optional<Fr> plain_value;
  // AclSet: clients allowed to read `key`.
  std::vector<std::uint32_t> acl;

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<Request> from_bytes(codec::Reader& r);
  Digest digest() const { return sha256(to_bytes()); }
};

// ---------------------------------------------------------------------------
// Protocol messages
// ---------------------------------------------------------------------------

struct ClientRequest {  // client -> (presumed) leader: the public part
  Request req;
};
struct PutShare {  // client -> replica i: the private part
  std::string key;
  std::uint32_t client = 0;
  std::uint64_t reqseq = 0;
  Digest request_digest{};  // ties the share to its public half
  ShareVec share;
};
struct PutAck {
  std::string key;
  std::uint64_t reqseq = 0;
  std::uint32_t replica = 0;
};
struct GetReply {
  std::string key;
  std::uint64_t reqseq = 0;
  std::uint32_t replica = 0;
  bool denied = false;
  std::optional<CommitmentVec> commitment;
  std::optional<ShareVec> share;
  std::optional<Fr> plain_value;   // baseline mode / exposed values
};
struct PrePrepare {
  std::uint32_t view = 0;
  std::uint64_t seq = 0;
  Request req;
};
struct Prepare {
  std::uint32_t view = 0;
  std::uint64_t seq = 0;
  Digest digest{};
  std::uint32_t replica = 0;
  Digest sig{};  // carried so prepare sets act as commit-certificates
};
struct CommitMsg {
  std::uint32_t view = 0;
  std::uint64_t seq = 0;
  Digest digest{};
  std::uint32_t replica = 0;
};
struct RecoveryRequest {
  Digest request_digest{};  // the Put whose share is missing
  std::string key;
  std::uint32_t client = 0;  // dealer, selects the parameter set
  std::uint32_t requester = 0;
};
struct RecoveryResponse {
  Digest request_digest{};
  std::string key;
  std::uint32_t responder = 0;
  RecoveryShare rs;
};
struct ExposeRequest {  // dealer fault: ask peers to reveal slot-0 shares
  Digest request_digest{};
  std::string key;
  std::uint32_t requester = 0;
  DealerFaultEvidence evidence;
};
struct ExposeReply {
  Digest request_digest{};
  std::string key;
  std::uint32_t replica = 0;
  VssShare entry0;
};
struct CheckpointMsg {
  std::uint64_t seq = 0;
  Digest digest{};
  std::uint32_t replica = 0;
  Digest sig{};  // standalone signature, so 2f+1 of these prove a checkpoint
};

// One log entry as carried inside a view-change message.
struct VcEntry {
  PrePrepare pre;                        // request + the view it prepared in
  bool committed = false;                // had a commit-certificate locally
  std::vector<Prepare> commit_cert;      // 2f+1 prepares when committed
};
struct ViewChange {
  std::uint32_t new_view = 0;
  std::uint32_t replica = 0;
  std::uint64_t stable_seq = 0;
  Digest stable_digest{};
  std::vector<VcEntry> entries;  // log above the stable checkpoint
};
struct NewView {
  std::uint32_t view = 0;
  std::vector<ViewChange> proof;     // the set P of 2f+1 view-changes
  std::vector<PrePrepare> leader_log;  // the log G replayed in the new view
};
struct StateTransferRequest {
  std::uint64_t have_seq = 0;
  std::uint32_t requester = 0;
};
struct StateTransferResponse {
  std::uint64_t stable_seq = 0;
  std::vector<CheckpointMsg> checkpoint_proof;  // 2f+1 matching messages
  // Serialized public store at the stable checkpoint; its hash (together
  // with stable_seq) must match the checkpoint digest in the proof.
  std::vector<std::uint8_t> snapshot;
  std::uint32_t responder = 0;
};

using Message =
    std::variant<ClientRequest, PutShare, PutAck, GetReply, PrePrepare, Prepare,
                 CommitMsg, RecoveryRequest, RecoveryResponse, ExposeRequest,
                 ExposeReply, CheckpointMsg, ViewChange, NewView,
                 StateTransferRequest, StateTransferResponse>;

// version tag byte ‖ type ‖ sender ‖ payload ‖ signature
struct Envelope {
  std::uint32_t sender = 0;  // replica id, or kClientBase + client id
  Message msg;

  std::vector<std::uint8_t> payload_bytes() const;
  std::vector<std::uint8_t> to_bytes(const Digest& sig) const;
  static std::optional<std::pair<Envelope, Digest>> from_bytes(
      std::span<const std::uint8_t> in);
};

constexpr std::uint32_t kClientBase = 1000;
constexpr std::uint32_t kBroadcast = 0xffffffff;

// Simulator-grade authenticator: a keyed hash under per-sender keys derived
// from a master seed every party holds. Stands in for real signatures
// behind this interface.
class Signer {
 public:
  explicit Signer(std::uint64_t master_seed) : master_(master_seed) {}
  Digest sign(std::uint32_t sender, std::span<const std::uint8_t> payload) const;
  bool verify(std::uint32_t sender, std::span<const std::uint8_t> payload,
              const Digest& sig) const;

 private:
  std::uint64_t master_;
};

// ---------------------------------------------------------------------------
// Replica
// ---------------------------------------------------------------------------

struct Config {
  std::uint32_t n = 4, f = 1;
  std::uint32_t window = 128;
  std::uint64_t checkpoint_period = 64;
  std::uint64_t recovery_timeout = 40;   // ticks before requesting recovery
  std::uint64_t viewchange_timeout = 400;
  bool sharing = true;
  std::uint32_t k() const { return f + 1; }
  std::uint32_t quorum() const { return 2 * f + 1; }
};

// Per-dealer (client) parameter set: the replica's DPRF key share for that
// client's sharings plus the public parameters.
struct ClientParams {
  SavssParams params;
  avss::dprf::DprfPrivateKey dprf_sk;
};

struct Outgoing {
  std::uint32_t dest = 0;  // replica id, kClientBase+client, or kBroadcast
  Message msg;
};

class Replica {
 public:
  Replica(std::uint32_t id, Config cfg, Signer signer,
          std::map<std::uint32_t, ClientParams> client_params,
          std::uint64_t rng_seed);

  void on_message(std::uint32_t sender, const Message& msg, std::uint64_t now);
  void on_tick(std::uint64_t now);
  std::vector<Outgoing> drain() { return std::exchange(outbox_, {}); }

  // Observability for checkers and tests.
  std::uint32_t id() const { return id_; }
  std::uint32_t view() const { return view_; }
  std::uint64_t last_executed() const { return last_executed_; }
  std::uint64_t committed_count() const { return committed_count_; }
  Digest public_store_digest() const;
  bool has_private_share(const std::string& key) const;
  const std::vector<Digest>& dealer_faults() const { return dealer_faults_; }
  const std::map<std::string, Fr>& exposed_values() const { return exposed_; }
  std::uint64_t pending_log_len() const;
  std::uint64_t max_pending_seen() const { return max_pending_seen_; }

  // Fault injection hooks (driven by the simulator's fault script).
  void crash() { crashed_ = true; }
  bool crashed() const { return crashed_; }
  void set_equivocate(bool v) { equivocate_ = v; }
  void set_garbage_replies(bool v) { garbage_replies_ = v; }

 private:
  struct LogEntry {
    PrePrepare pre;
    bool have_pre = false;  // prepares/commits may arrive first
    Digest digest{};
    enum class St { PrePrepared, Prepared, Committed, Executed } status =
        St::PrePrepared;
    std::map<std::uint32_t, Prepare> prepares;
    std::map<std::uint32_t, CommitMsg> commits;
    std::vector<Prepare> commit_cert;
    bool share_ok = false;
    bool prepare_sent = false;
  };
  struct PubEntry {
    std::uint32_t owner = 0;
    std::vector<std::uint32_t> acl;
    std::optional<CommitmentVec> commitment;
    std::optional<Fr> plain_value;
    std::uint64_t reqseq = 0;
    std::uint64_t seq = 0;  // consensus seq of last modification
    Digest request_digest{};
  };
  struct PendingRecovery {
    std::string key;
    std::uint32_t client = 0;
    std::map<std::uint32_t, RecoveryShare> responses;
    std::uint64_t started = 0;
    bool requested = false;
    bool faulted = false;
    std::map<std::uint32_t, VssShare> reveals;  // expose path
    std::optional<DealerFaultEvidence> evidence;
  };

  bool is_leader() const { return view_ % cfg_.n == id_; }
  std::uint32_t leader_of(std::uint32_t view) const { return view % cfg_.n; }
  void send(std::uint32_t dest, Message msg, std::uint64_t cost = 0);
  void broadcast(Message msg, std::uint64_t cost = 0);

  void handle_client_request(const Request& req, std::uint64_t now);
  void handle_put_share(const PutShare& m, std::uint64_t now);
  void handle_preprepare(std::uint32_t sender, const PrePrepare& pp,
                         std::uint64_t now);
  void handle_prepare(const Prepare& p, std::uint64_t now);
  void handle_commit(const CommitMsg& c, std::uint64_t now);
  void attach_share(LogEntry& e, std::uint64_t now);
  void maybe_prepare(LogEntry& e, std::uint64_t now);
  void check_prepared(LogEntry& e, std::uint64_t now);
  void check_committed(LogEntry& e, std::uint64_t now);
  void maybe_execute(std::uint64_t now);
  void execute(LogEntry& e, std::uint64_t now);
  void start_recovery(const Digest& d, const std::string& key,
                      std::uint32_t client, std::uint64_t now, bool immediate);
  void handle_recovery_request(const RecoveryRequest& rr, std::uint64_t now);
  void handle_recovery_response(const RecoveryResponse& resp, std::uint64_t now);
  void handle_expose_request(const ExposeRequest& er, std::uint64_t now);
  void handle_expose_reply(const ExposeReply& er, std::uint64_t now);
  void try_expose(PendingRecovery& rec);
  void handle_checkpoint(const CheckpointMsg& cp);
  void make_checkpoint(std::uint64_t seq);
  void try_stabilize(std::uint64_t seq);
  void start_view_change(std::uint32_t new_view, std::uint64_t now);
  void handle_view_change(const ViewChange& vc, std::uint64_t now);
  void handle_new_view(std::uint32_t sender, const NewView& nv,
                       std::uint64_t now);
  void handle_state_request(const StateTransferRequest& req);
  void handle_state_response(const StateTransferResponse& resp,
                             std::uint64_t now);
  const CommitmentVec* commitment_for(const Digest& d,
                                      std::uint32_t* client_out) const;
  const ShareVec* own_share_for(const Digest& request_digest) const;
  ClientParams* params_for(std::uint32_t client);
  void assign_from_queue(std::uint64_t now);
  void requeue_request(const Request& req);
  std::vector<std::uint8_t> encode_snapshot() const;
  bool apply_snapshot(std::span<const std::uint8_t> in);
  void refresh_deadline(std::uint64_t now);
  Prepare make_prepare(std::uint32_t view, std::uint64_t seq,
                       const Digest& d) const;
  bool prepare_sig_ok(const Prepare& p) const;

  std::uint32_t id_;
  Config cfg_;
  Signer signer_;
  std::map<std::uint32_t, ClientParams> client_params_;
  Entropy rng_;
  std::deque<Request> client_queue_;  // leader-side backlog when window full

  std::uint32_t view_ = 0;
  std::uint64_t next_seq_ = 1;  // leader-side allocator
  std::map<std::uint64_t, LogEntry> log_;
  std::uint64_t last_executed_ = 0;
  std::uint64_t committed_count_ = 0;
  std::uint64_t max_pending_seen_ = 0;

  std::map<std::string, PubEntry> pub_;
  std::map<std::string, ShareVec> priv_;  // keyed by key
  // Private halves that arrived ahead of (or independent of) ordering,
  // keyed by request digest.
  std::map<std::array<std::uint8_t, 32>, ShareVec> pending_shares_;
  std::map<std::array<std::uint8_t, 32>, PendingRecovery> recoveries_;
  std::map<std::array<std::uint8_t, 32>, std::uint64_t> request_first_seen_;

  std::uint64_t stable_seq_ = 0;
  Digest stable_digest_{};
  std::vector<CheckpointMsg> stable_proof_;
  std::map<std::uint64_t, std::map<std::uint32_t, CheckpointMsg>> checkpoints_;
  std::map<std::uint64_t, std::vector<std::uint8_t>> checkpoint_snapshots_;

  bool view_changing_ = false;
  std::uint32_t pending_view_ = 0;
  std::map<std::uint32_t, std::map<std::uint32_t, ViewChange>> view_changes_;
  std::optional<std::uint64_t> progress_deadline_;

  std::map<std::string, Fr> exposed_;
  std::vector<Digest> dealer_faults_;

  bool crashed_ = false;
  bool equivocate_ = false;
  bool garbage_replies_ = false;
  bool state_transfer_inflight_ = false;

  std::vector<Outgoing> outbox_;
};

// Serialization entry points (used for signing and the wire format).
std::vector<std::uint8_t> message_to_bytes(const Message& m);
std::optional<Message> message_from_bytes(std::span<const std::uint8_t> in);

}  // namespace avss::kvstore
