#include "avss/kvstore.hpp"

#include <algorithm>

namespace avss::kvstore {

using namespace avss::codec;
using avss::savss::savss_expose_dealer;
using avss::savss::savss_fault_valid;
using avss::savss::savss_recover;
using avss::savss::savss_recover_contrib;
using avss::savss::savss_recover_verify;
using avss::savss::savss_verify;
using avss::savss::RecoverResult;

namespace {

template <class... Ts>
struct overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

void put_digest(std::vector<std::uint8_t>& out, const Digest& d) {
  put_bytes(out, d);
}
Digest rd_digest(Reader& r) {
  Digest d{};
  auto s = r.take(32);
  if (r.ok) std::copy(s.begin(), s.end(), d.begin());
  return d;
}

// ---- per-message encoders/decoders (tag handled by the dispatcher) ----

void enc(std::vector<std::uint8_t>& out, const ClientRequest& m) {
  put_bytes(out, m.req.to_bytes());
}
bool dec(Reader& r, ClientRequest& m) {
  auto q = Request::from_bytes(r);
  if (!q) return false;
  m.req = *q;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const PutShare& m) {
  put_str(out, m.key);
  put_u32(out, m.client);
  put_u64(out, m.reqseq);
  put_digest(out, m.request_digest);
  put_blob(out, m.share.to_bytes());
}
bool dec(Reader& r, PutShare& m) {
  m.key = r.str();
  m.client = r.u32();
  m.reqseq = r.u64();
  m.request_digest = rd_digest(r);
  auto s = ShareVec::from_bytes(r.blob());
  if (!r.ok || !s) return false;
  m.share = *s;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const PutAck& m) {
  put_str(out, m.key);
  put_u64(out, m.reqseq);
  put_u32(out, m.replica);
}
bool dec(Reader& r, PutAck& m) {
  m.key = r.str();
  m.reqseq = r.u64();
  m.replica = r.u32();
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const GetReply& m) {
  put_str(out, m.key);
  put_u64(out, m.reqseq);
  put_u32(out, m.replica);
  put_u8(out, m.denied);
  put_u8(out, m.commitment.has_value());
  if (m.commitment) put_blob(out, m.commitment->to_bytes());
  put_u8(out, m.share.has_value());
  if (m.share) put_blob(out, m.share->to_bytes());
  put_u8(out, m.plain_value.has_value());
  if (m.plain_value) put_fr(out, *m.plain_value);
}
bool dec(Reader& r, GetReply& m) {
  m.key = r.str();
  m.reqseq = r.u64();
  m.replica = r.u32();
  m.denied = r.u8();
  if (r.u8()) {
    auto c = CommitmentVec::from_bytes(r.blob());
    if (!r.ok || !c) return false;
    m.commitment = *c;
  }
  if (r.u8()) {
    auto s = ShareVec::from_bytes(r.blob());
    if (!r.ok || !s) return false;
    m.share = *s;
  }
  if (r.u8()) m.plain_value = r.fr();
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const PrePrepare& m) {
  put_u32(out, m.view);
  put_u64(out, m.seq);
  put_bytes(out, m.req.to_bytes());
}
bool dec(Reader& r, PrePrepare& m) {
  m.view = r.u32();
  m.seq = r.u64();
  auto q = Request::from_bytes(r);
  if (!q) return false;
  m.req = *q;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const Prepare& m) {
  put_u32(out, m.view);
  put_u64(out, m.seq);
  put_digest(out, m.digest);
  put_u32(out, m.replica);
  put_digest(out, m.sig);
}
bool dec(Reader& r, Prepare& m) {
  m.view = r.u32();
  m.seq = r.u64();
  m.digest = rd_digest(r);
  m.replica = r.u32();
  m.sig = rd_digest(r);
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const CommitMsg& m) {
  put_u32(out, m.view);
  put_u64(out, m.seq);
  put_digest(out, m.digest);
  put_u32(out, m.replica);
}
bool dec(Reader& r, CommitMsg& m) {
  m.view = r.u32();
  m.seq = r.u64();
  m.digest = rd_digest(r);
  m.replica = r.u32();
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const RecoveryRequest& m) {
  put_digest(out, m.request_digest);
  put_str(out, m.key);
  put_u32(out, m.client);
  put_u32(out, m.requester);
}
bool dec(Reader& r, RecoveryRequest& m) {
  m.request_digest = rd_digest(r);
  m.key = r.str();
  m.client = r.u32();
  m.requester = r.u32();
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const RecoveryResponse& m) {
  put_digest(out, m.request_digest);
  put_str(out, m.key);
  put_u32(out, m.responder);
  put_blob(out, m.rs.to_bytes());
}
bool dec(Reader& r, RecoveryResponse& m) {
  m.request_digest = rd_digest(r);
  m.key = r.str();
  m.responder = r.u32();
  auto rs = RecoveryShare::from_bytes(r.blob());
  if (!r.ok || !rs) return false;
  m.rs = *rs;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const ExposeRequest& m) {
  put_digest(out, m.request_digest);
  put_str(out, m.key);
  put_u32(out, m.requester);
  put_blob(out, m.evidence.to_bytes());
}
bool dec(Reader& r, ExposeRequest& m) {
  m.request_digest = rd_digest(r);
  m.key = r.str();
  m.requester = r.u32();
  auto ev = DealerFaultEvidence::from_bytes(r.blob());
  if (!r.ok || !ev) return false;
  m.evidence = *ev;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const ExposeReply& m) {
  put_digest(out, m.request_digest);
  put_str(out, m.key);
  put_u32(out, m.replica);
  put_blob(out, m.entry0.to_bytes());
}
bool dec(Reader& r, ExposeReply& m) {
  m.request_digest = rd_digest(r);
  m.key = r.str();
  m.replica = r.u32();
  auto s = VssShare::from_bytes(r.blob());
  if (!r.ok || !s) return false;
  m.entry0 = *s;
  return true;
}

void enc(std::vector<std::uint8_t>& out, const CheckpointMsg& m) {
  put_u64(out, m.seq);
  put_digest(out, m.digest);
  put_u32(out, m.replica);
  put_digest(out, m.sig);
}
bool dec(Reader& r, CheckpointMsg& m) {
  m.seq = r.u64();
  m.digest = rd_digest(r);
  m.replica = r.u32();
  m.sig = rd_digest(r);
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const ViewChange& m) {
  put_u32(out, m.new_view);
  put_u32(out, m.replica);
  put_u64(out, m.stable_seq);
  put_digest(out, m.stable_digest);
  put_u16(out, (std::uint16_t)m.entries.size());
  for (const VcEntry& e : m.entries) {
    enc(out, e.pre);
    put_u8(out, e.committed);
    put_u16(out, (std::uint16_t)e.commit_cert.size());
    for (const Prepare& p : e.commit_cert) enc(out, p);
  }
}
bool dec(Reader& r, ViewChange& m) {
  m.new_view = r.u32();
  m.replica = r.u32();
  m.stable_seq = r.u64();
  m.stable_digest = rd_digest(r);
  std::size_t n = r.u16();
  for (std::size_t i = 0; i < n && r.ok; ++i) {
    VcEntry e;
    if (!dec(r, e.pre)) return false;
    e.committed = r.u8();
    std::size_t np = r.u16();
    for (std::size_t j = 0; j < np && r.ok; ++j) {
      Prepare p;
      if (!dec(r, p)) return false;
      e.commit_cert.push_back(p);
    }
    m.entries.push_back(std::move(e));
  }
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const NewView& m) {
  put_u32(out, m.view);
  put_u16(out, (std::uint16_t)m.proof.size());
  for (const ViewChange& vc : m.proof) {
    std::vector<std::uint8_t> b;
    enc(b, vc);
    put_blob(out, b);
  }
  put_u16(out, (std::uint16_t)m.leader_log.size());
  for (const PrePrepare& pp : m.leader_log) enc(out, pp);
}
bool dec(Reader& r, NewView& m) {
  m.view = r.u32();
  std::size_t np = r.u16();
  for (std::size_t i = 0; i < np && r.ok; ++i) {
    Reader inner{r.blob()};
    ViewChange vc;
    if (!r.ok || !dec(inner, vc) || !inner.done()) return false;
    m.proof.push_back(std::move(vc));
  }
  std::size_t nl = r.u16();
  for (std::size_t i = 0; i < nl && r.ok; ++i) {
    PrePrepare pp;
    if (!dec(r, pp)) return false;
    m.leader_log.push_back(std::move(pp));
  }
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const StateTransferRequest& m) {
  put_u64(out, m.have_seq);
  put_u32(out, m.requester);
}
bool dec(Reader& r, StateTransferRequest& m) {
  m.have_seq = r.u64();
  m.requester = r.u32();
  return r.ok;
}

void enc(std::vector<std::uint8_t>& out, const StateTransferResponse& m) {
  put_u64(out, m.stable_seq);
  put_u16(out, (std::uint16_t)m.checkpoint_proof.size());
  for (const CheckpointMsg& cp : m.checkpoint_proof) enc(out, cp);
  put_blob(out, m.snapshot);
  put_u32(out, m.responder);
}
bool dec(Reader& r, StateTransferResponse& m) {
  m.stable_seq = r.u64();
  std::size_t n = r.u16();
  for (std::size_t i = 0; i < n && r.ok; ++i) {
    CheckpointMsg cp;
    if (!dec(r, cp)) return false;
    m.checkpoint_proof.push_back(cp);
  }
  auto b = r.blob();
  if (!r.ok) return false;
  m.snapshot.assign(b.begin(), b.end());
  m.responder = r.u32();
  return r.ok;
}

Digest checkpoint_digest(std::uint64_t seq,
                         std::span<const std::uint8_t> snapshot) {
  std::vector<std::uint8_t> b;
  put_u64(b, seq);
  put_bytes(b, snapshot);
  return sha256(b);
}

std::vector<std::uint8_t> prepare_sig_payload(std::uint32_t view,
                                              std::uint64_t seq,
                                              const Digest& d,
                                              std::uint32_t replica) {
  std::vector<std::uint8_t> b;
  put_str(b, "prep");
  put_u32(b, view);
  put_u64(b, seq);
  put_digest(b, d);
  put_u32(b, replica);
  return b;
}

std::vector<std::uint8_t> checkpoint_sig_payload(std::uint64_t seq,
                                                 const Digest& d,
                                                 std::uint32_t replica) {
  std::vector<std::uint8_t> b;
  put_str(b, "ckpt");
  put_u64(b, seq);
  put_digest(b, d);
  put_u32(b, replica);
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Request / envelope wire formats
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> Request::to_bytes() const {
  std::vector<std::uint8_t> out;
  put_u8(out, (std::uint8_t)kind);
  put_str(out, key);
  put_u32(out, client);
  put_u64(out, reqseq);
  bool has_c = !commitment.entries.empty();
  put_u8(out, has_c);
  if (has_c) put_blob(out, commitment.to_bytes());
  put_u8(out, plain_value.has_value());
  if (plain_value) put_fr(out, *plain_value);
  put_u32(out, (std::uint32_t)acl.size());
  for (std::uint32_t a : acl) put_u32(out, a);
  return out;
}

std::optional<Request> Request::from_bytes(Reader& r) {
  Request q;
  std::uint8_t kind = r.u8();
  if (kind > 2) return std::nullopt;
  q.kind = (Kind)kind;
  q.key = r.str();
  q.client = r.u32();
  q.reqseq = r.u64();
  if (r.u8()) {
    auto c = CommitmentVec::from_bytes(r.blob());
    if (!r.ok || !c) return std::nullopt;
    q.commitment = *c;
  }
  if (r.u8()) q.plain_value = r.fr();
  std::size_t na = r.u32();
  if (na > 1u << 16) return std::nullopt;
  for (std::size_t i = 0; i < na && r.ok; ++i) q.acl.push_back(r.u32());
  if (!r.ok) return std::nullopt;
  return q;
}

std::vector<std::uint8_t> message_to_bytes(const Message& m) {
  std::vector<std::uint8_t> out;
  put_u8(out, (std::uint8_t)m.index());
  std::visit([&](const auto& v) { enc(out, v); }, m);
  return out;
}

std::optional<Message> message_from_bytes(std::span<const std::uint8_t> in) {
  Reader r{in};
  std::uint8_t tag = r.u8();
  Message m;
  bool ok = false;
  auto parse = [&]<class T>(std::in_place_type_t<T>) {
    T v;
    if (dec(r, v)) {
      m = std::move(v);
      ok = true;
    }
  };
  switch (tag) {
    case 0: parse(std::in_place_type<ClientRequest>); break;
    case 1: parse(std::in_place_type<PutShare>); break;
    case 2: parse(std::in_place_type<PutAck>); break;
    case 3: parse(std::in_place_type<GetReply>); break;
    case 4: parse(std::in_place_type<PrePrepare>); break;
    case 5: parse(std::in_place_type<Prepare>); break;
    case 6: parse(std::in_place_type<CommitMsg>); break;
    case 7: parse(std::in_place_type<RecoveryRequest>); break;
    case 8: parse(std::in_place_type<RecoveryResponse>); break;
    case 9: parse(std::in_place_type<ExposeRequest>); break;
    case 10: parse(std::in_place_type<ExposeReply>); break;
    case 11: parse(std::in_place_type<CheckpointMsg>); break;
    case 12: parse(std::in_place_type<ViewChange>); break;
    case 13: parse(std::in_place_type<NewView>); break;
    case 14: parse(std::in_place_type<StateTransferRequest>); break;
    case 15: parse(std::in_place_type<StateTransferResponse>); break;
    default: return std::nullopt;
  }
  if (!ok || !r.done()) return std::nullopt;
  return m;
}

std::vector<std::uint8_t> Envelope::payload_bytes() const {
  return message_to_bytes(msg);
}

std::vector<std::uint8_t> Envelope::to_bytes(const Digest& sig) const {
  std::vector<std::uint8_t> out;
  put_u8(out, 1);  // wire version
  put_u32(out, sender);
  put_blob(out, payload_bytes());
  put_digest(out, sig);
  return out;
}

std::optional<std::pair<Envelope, Digest>> Envelope::from_bytes(
    std::span<const std::uint8_t> in) {
  Reader r{in};
  if (r.u8() != 1) return std::nullopt;
  Envelope e;
  e.sender = r.u32();
  auto payload = r.blob();
  if (!r.ok) return std::nullopt;
  auto m = message_from_bytes(payload);
  if (!m) return std::nullopt;
  e.msg = std::move(*m);
  Digest sig = rd_digest(r);
  if (!r.done()) return std::nullopt;
  return std::pair{std::move(e), sig};
}

Digest Signer::sign(std::uint32_t sender,
                    std::span<const std::uint8_t> payload) const {
  Sha256 kh;
  std::vector<std::uint8_t> kb;
  put_str(kb, "kv-mac-key");
  put_u64(kb, master_);
  put_u32(kb, sender);
  kh.update(kb);
  Digest key = kh.finish();
  Sha256 h;
  h.update(key);
  h.update(payload);
  return h.finish();
}

bool Signer::verify(std::uint32_t sender, std::span<const std::uint8_t> payload,
                    const Digest& sig) const {
  return sign(sender, payload) == sig;
}

// ---------------------------------------------------------------------------
// Replica
// ---------------------------------------------------------------------------

Replica::Replica(std::uint32_t id, Config cfg, Signer signer,
                 std::map<std::uint32_t, ClientParams> client_params,
                 std::uint64_t rng_seed)
    : id_(id),
      cfg_(cfg),
      signer_(signer),
      client_params_(std::move(client_params)),
      rng_(rng_seed) {
  // Genesis checkpoint over the empty store, so state transfer has a floor.
  checkpoint_snapshots_[0] = encode_snapshot();
  stable_digest_ = checkpoint_digest(0, checkpoint_snapshots_[0]);
}

void Replica::send(std::uint32_t dest, Message msg, std::uint64_t) {
  outbox_.push_back({dest, std::move(msg)});
}

void Replica::broadcast(Message msg, std::uint64_t) {
  outbox_.push_back({kBroadcast, std::move(msg)});
}

ClientParams* Replica::params_for(std::uint32_t client) {
  auto it = client_params_.find(client);
  return it == client_params_.end() ? nullptr : &it->second;
}

Prepare Replica::make_prepare(std::uint32_t view, std::uint64_t seq,
                              const Digest& d) const {
  Prepare p{view, seq, d, id_, {}};
  p.sig = signer_.sign(id_, prepare_sig_payload(view, seq, d, id_));
  return p;
}

bool Replica::prepare_sig_ok(const Prepare& p) const {
  return signer_.verify(
      p.replica, prepare_sig_payload(p.view, p.seq, p.digest, p.replica),
      p.sig);
}

std::uint64_t Replica::pending_log_len() const {
  std::uint64_t n = 0;
  for (const auto& [seq, e] : log_)
    if (e.have_pre && e.status != LogEntry::St::Executed) ++n;
  return n;
}

Digest Replica::public_store_digest() const {
  auto snap = encode_snapshot();
  return sha256(snap);
}

bool Replica::has_private_share(const std::string& key) const {
  return priv_.count(key) != 0;
}

// ---- message dispatch ----

void Replica::on_message(std::uint32_t sender, const Message& msg,
                         std::uint64_t now) {
  if (crashed_) return;
  std::visit(
      overload{
          [&](const ClientRequest& m) { handle_client_request(m.req, now); },
          [&](const PutShare& m) { handle_put_share(m, now); },
          [&](const PutAck&) {},
          [&](const GetReply&) {},
          [&](const PrePrepare& m) { handle_preprepare(sender, m, now); },
          [&](const Prepare& m) { handle_prepare(m, now); },
          [&](const CommitMsg& m) { handle_commit(m, now); },
          [&](const RecoveryRequest& m) { handle_recovery_request(m, now); },
          [&](const RecoveryResponse& m) { handle_recovery_response(m, now); },
          [&](const ExposeRequest& m) { handle_expose_request(m, now); },
          [&](const ExposeReply& m) { handle_expose_reply(m, now); },
          [&](const CheckpointMsg& m) { handle_checkpoint(m); },
          [&](const ViewChange& m) { handle_view_change(m, now); },
          [&](const NewView& m) { handle_new_view(sender, m, now); },
          [&](const StateTransferRequest& m) { handle_state_request(m); },
          [&](const StateTransferResponse& m) {
            handle_state_response(m, now);
          },
      },
      msg);
}

void Replica::on_tick(std::uint64_t now) {
  if (crashed_) return;
  // Share-recovery timers: ask peers once the client's PutShare is overdue.
  for (auto& [d, rec] : recoveries_) {
    if (rec.requested || rec.faulted) continue;
    if (now < rec.started + cfg_.recovery_timeout) continue;
    bool still_missing = false;
    if (auto it = pub_.find(rec.key);
        it != pub_.end() && it->second.request_digest == d)
      still_missing = !priv_.count(rec.key);
    else
      for (const auto& [seq, e] : log_)
        if (e.have_pre && e.digest == d && !e.share_ok) still_missing = true;
    if (!still_missing) continue;
    rec.requested = true;
    broadcast(RecoveryRequest{d, rec.key, rec.client, id_});
  }
  // Progress timer: pending work that outlives the deadline means the
  // current leader has failed us.
  bool pending = pending_log_len() > 0 || !request_first_seen_.empty();
  if (!pending) {
    progress_deadline_.reset();
  } else if (!progress_deadline_) {
    progress_deadline_ = now + cfg_.viewchange_timeout;
  } else if (now >= *progress_deadline_) {
    start_view_change(view_changing_ ? pending_view_ + 1 : view_ + 1, now);
  }
  if (is_leader() && !view_changing_) assign_from_queue(now);
}

// ---- normal case ----

void Replica::handle_client_request(const Request& req, std::uint64_t now) {
  Digest d = req.digest();
  if (request_first_seen_.count(d)) return;
  request_first_seen_[d] = now;
  // Every replica queues the request; only the current leader proposes, but
  // a later leader needs the backlog after a view change.
  client_queue_.push_back(req);
  if (is_leader() && !view_changing_) assign_from_queue(now);
}

void Replica::requeue_request(const Request& req) {
  // A view change dropped the log entry carrying this request; put it back in
  // the leader backlog so a later leader can propose it again.
  if (req.key.empty()) return;  // no-op filler
  Digest d = req.digest();
  if (!request_first_seen_.count(d)) return;  // already executed
  for (const Request& q : client_queue_)
    if (q.digest() == d) return;
  client_queue_.push_back(req);
}

void Replica::assign_from_queue(std::uint64_t now) {
  while (!client_queue_.empty() && next_seq_ <= stable_seq_ + cfg_.window) {
    Request req = client_queue_.front();
    client_queue_.pop_front();
    Digest d = req.digest();
    bool in_log = false;
    for (const auto& [seq, e] : log_)
      if (e.have_pre && e.digest == d) in_log = true;
    if (in_log) continue;
    std::uint64_t seq = next_seq_++;
    PrePrepare pp{view_, seq, req};
    if (equivocate_) {
      // Byzantine leader: half the replicas see a conflicting proposal.
      Request forged = req;
      forged.reqseq = req.reqseq + (1ull << 32);
      PrePrepare alt{view_, seq, forged};
      for (std::uint32_t r = 0; r < cfg_.n; ++r) {
        if (r == id_) continue;
        send(r, r % 2 == 0 ? pp : alt);
      }
    } else {
      broadcast(pp);
    }
    handle_preprepare(id_, pp, now);
  }
}

void Replica::handle_preprepare(std::uint32_t sender, const PrePrepare& pp,
                                std::uint64_t now) {
  if (view_changing_ || pp.view != view_) return;
  if (sender != leader_of(pp.view)) return;
  if (pp.seq <= stable_seq_ || pp.seq > stable_seq_ + cfg_.window) return;
  if (pp.seq <= last_executed_) return;
  auto& e = log_[pp.seq];
  if (e.have_pre) {
    // Conflicting proposal at the same seq: keep the first, let the
    // progress timer deal with an equivocating leader.
    return;
  }
  e.pre = pp;
  e.have_pre = true;
  e.digest = pp.req.digest();
  request_first_seen_.emplace(e.digest, now);
  max_pending_seen_ = std::max(max_pending_seen_, pending_log_len());
  attach_share(e, now);
  maybe_prepare(e, now);
}

void Replica::attach_share(LogEntry& e, std::uint64_t now) {
  const Request& q = e.pre.req;
  bool shared_put = q.kind == Request::Kind::Put && cfg_.sharing &&
                    !q.plain_value && !q.commitment.entries.empty();
  if (!shared_put) {
    e.share_ok = true;
    return;
  }
  ClientParams* cp = params_for(q.client);
  if (!cp) {
    // No key material for this dealer: participate in ordering only.
    e.share_ok = true;
    return;
  }
  auto it = pending_shares_.find(e.digest);
  if (it != pending_shares_.end() &&
      savss_verify(cp->params, q.commitment, it->second)) {
    e.share_ok = true;
    return;
  }
  if (it != pending_shares_.end()) pending_shares_.erase(it);
  start_recovery(e.digest, q.key, q.client, now, false);
}

void Replica::maybe_prepare(LogEntry& e, std::uint64_t now) {
  if (e.prepare_sent || !e.have_pre) return;
  if (!e.share_ok) {
    auto it = recoveries_.find(e.digest);
    bool faulted = it != recoveries_.end() && it->second.faulted;
    if (!faulted) return;  // hold the prepare until the share is in hand
  }
  Prepare p = make_prepare(e.pre.view, e.pre.seq, e.digest);
  e.prepares[id_] = p;
  e.prepare_sent = true;
  broadcast(p);
  check_prepared(e, now);
}

void Replica::handle_prepare(const Prepare& p, std::uint64_t now) {
  // Buffered even across view changes: replicas adopt a new view at
  // different times, and quorum counting only trusts digest matches.
  if (p.seq <= stable_seq_ || p.seq > stable_seq_ + cfg_.window) return;
  if (p.replica >= cfg_.n || !prepare_sig_ok(p)) return;
  auto& e = log_[p.seq];
  if (e.have_pre && !(p.digest == e.digest)) return;
  e.prepares[p.replica] = p;
  if (e.have_pre) check_prepared(e, now);
}

void Replica::check_prepared(LogEntry& e, std::uint64_t now) {
  if (e.status != LogEntry::St::PrePrepared || !e.prepare_sent) return;
  std::vector<Prepare> matching;
  for (const auto& [r, p] : e.prepares)
    if (p.digest == e.digest) matching.push_back(p);
  if (matching.size() < cfg_.quorum()) return;
  matching.resize(cfg_.quorum());
  e.status = LogEntry::St::Prepared;
  e.commit_cert = std::move(matching);
  CommitMsg c{view_, e.pre.seq, e.digest, id_};
  e.commits[id_] = c;
  broadcast(c);
  check_committed(e, now);
}

void Replica::handle_commit(const CommitMsg& c, std::uint64_t now) {
  if (c.seq <= stable_seq_ || c.seq > stable_seq_ + cfg_.window) return;
  if (c.replica >= cfg_.n) return;
  auto& e = log_[c.seq];
  if (e.have_pre && !(c.digest == e.digest)) return;
  e.commits[c.replica] = c;
  if (e.have_pre) check_committed(e, now);
}

void Replica::check_committed(LogEntry& e, std::uint64_t now) {
  if (e.status != LogEntry::St::Prepared) return;
  std::uint32_t matching = 0;
  for (const auto& [r, c] : e.commits)
    if (c.digest == e.digest) ++matching;
  if (matching < cfg_.quorum()) return;
  e.status = LogEntry::St::Committed;
  ++committed_count_;
  maybe_execute(now);
}

void Replica::maybe_execute(std::uint64_t now) {
  for (;;) {
    auto it = log_.find(last_executed_ + 1);
    if (it == log_.end() || !it->second.have_pre ||
        it->second.status != LogEntry::St::Committed)
      break;
    execute(it->second, now);
    it->second.status = LogEntry::St::Executed;
    last_executed_ = it->first;
    request_first_seen_.erase(it->second.digest);
    progress_deadline_.reset();
    if (cfg_.checkpoint_period && last_executed_ % cfg_.checkpoint_period == 0)
      make_checkpoint(last_executed_);
  }
}

void Replica::execute(LogEntry& e, std::uint64_t now) {
  const Request& q = e.pre.req;
  Digest d = e.digest;
  // Drop the request from the leader backlog everywhere.
  std::erase_if(client_queue_,
                [&](const Request& r) { return r.digest() == d; });
  if (q.key.empty()) return;  // no-op filler from a view change
  switch (q.kind) {
    case Request::Kind::Put: {
      auto it = pub_.find(q.key);
      bool allowed = it == pub_.end() || it->second.owner == q.client;
      if (allowed) {
        PubEntry pe;
        pe.owner = q.client;
        if (it != pub_.end()) pe.acl = it->second.acl;
        if (!q.commitment.entries.empty()) pe.commitment = q.commitment;
        pe.plain_value = q.plain_value;
        pe.reqseq = q.reqseq;
        pe.seq = e.pre.seq;
        pe.request_digest = d;
        pub_[q.key] = std::move(pe);
        exposed_.erase(q.key);  // a fresh write supersedes an exposure
        priv_.erase(q.key);
        if (auto ps = pending_shares_.find(d); ps != pending_shares_.end()) {
          priv_[q.key] = ps->second;
          pending_shares_.erase(ps);
        }
      }
      send(kClientBase + q.client, PutAck{q.key, q.reqseq, id_});
      break;
    }
    case Request::Kind::Get: {
      GetReply rep;
      rep.key = q.key;
      rep.reqseq = q.reqseq;
      rep.replica = id_;
      auto it = pub_.find(q.key);
      if (it != pub_.end()) {
        const PubEntry& pe = it->second;
        bool allowed = q.client == pe.owner ||
                       std::find(pe.acl.begin(), pe.acl.end(), q.client) !=
                           pe.acl.end();
        if (!allowed) {
          rep.denied = true;
        } else if (auto ex = exposed_.find(q.key); ex != exposed_.end()) {
          rep.plain_value = ex->second;
        } else if (pe.plain_value) {
          rep.plain_value = pe.plain_value;
        } else {
          rep.commitment = pe.commitment;
          if (auto pv = priv_.find(q.key); pv != priv_.end()) {
            rep.share = pv->second;
          } else if (cfg_.sharing && pe.commitment) {
            // e.g. after state transfer: rebuild our share in the background.
            start_recovery(pe.request_digest, q.key, pe.owner, now, true);
          }
          if (garbage_replies_ && rep.share && rep.share->entries[0])
            rep.share->entries[0]->value += Fr::one();
        }
      }
      send(kClientBase + q.client, rep);
      break;
    }
    case Request::Kind::AclSet: {
      auto it = pub_.find(q.key);
      if (it != pub_.end() && it->second.owner == q.client)
        it->second.acl = q.acl;
      send(kClientBase + q.client, PutAck{q.key, q.reqseq, id_});
      break;
    }
  }
}

// ---- two-part PUT: the private half ----

void Replica::handle_put_share(const PutShare& m, std::uint64_t now) {
  if (m.share.index != id_ + 1 || !m.share.is_dealt()) return;
  const Digest& d = m.request_digest;
  if (auto it = pub_.find(m.key);
      it != pub_.end() && it->second.request_digest == d &&
      it->second.commitment) {
    ClientParams* cp = params_for(it->second.owner);
    if (cp && savss_verify(cp->params, *it->second.commitment, m.share)) {
      priv_[m.key] = m.share;
      if (auto rc = recoveries_.find(d);
          rc != recoveries_.end() && !rc->second.faulted)
        recoveries_.erase(rc);
    }
    return;
  }
  for (auto& [seq, e] : log_) {
    if (!e.have_pre || !(e.digest == d)) continue;
    ClientParams* cp = params_for(e.pre.req.client);
    if (cp && savss_verify(cp->params, e.pre.req.commitment, m.share)) {
      pending_shares_[d] = m.share;
      e.share_ok = true;
      if (auto rc = recoveries_.find(d);
          rc != recoveries_.end() && !rc->second.faulted)
        recoveries_.erase(rc);
      maybe_prepare(e, now);
    }
    return;
  }
  // Request not seen yet; verified once the pre-prepare arrives.
  pending_shares_[d] = m.share;
}

// ---- share recovery ----

void Replica::start_recovery(const Digest& d, const std::string& key,
                             std::uint32_t client, std::uint64_t now,
                             bool immediate) {
  if (recoveries_.count(d) || !params_for(client)) return;
  PendingRecovery rec;
  rec.key = key;
  rec.client = client;
  // An immediate recovery skips the grace period for the client's PutShare.
  rec.started = immediate && now >= cfg_.recovery_timeout
                    ? now - cfg_.recovery_timeout
                    : now;
  recoveries_[d] = std::move(rec);
}

const CommitmentVec* Replica::commitment_for(const Digest& d,
                                             std::uint32_t* client_out) const {
  for (const auto& [key, pe] : pub_) {
    if (pe.request_digest == d && pe.commitment) {
      if (client_out) *client_out = pe.owner;
      return &*pe.commitment;
    }
  }
  for (const auto& [seq, e] : log_) {
    if (e.have_pre && e.digest == d && !e.pre.req.commitment.entries.empty()) {
      if (client_out) *client_out = e.pre.req.client;
      return &e.pre.req.commitment;
    }
  }
  return nullptr;
}

const ShareVec* Replica::own_share_for(const Digest& d) const {
  for (const auto& [key, pe] : pub_) {
    if (pe.request_digest == d) {
      auto it = priv_.find(key);
      return it == priv_.end() ? nullptr : &it->second;
    }
  }
  auto it = pending_shares_.find(d);
  return it == pending_shares_.end() ? nullptr : &it->second;
}

void Replica::handle_recovery_request(const RecoveryRequest& rr,
                                      std::uint64_t now) {
  (void)now;
  if (rr.requester == id_ || rr.requester >= cfg_.n) return;
  std::uint32_t client = 0;
  const CommitmentVec* c = commitment_for(rr.request_digest, &client);
  if (!c || client != rr.client) return;
  const ShareVec* own = own_share_for(rr.request_digest);
  if (!own || !own->is_dealt()) return;
  ClientParams* cp = params_for(client);
  if (!cp) return;
  try {
    RecoveryShare rs = savss_recover_contrib(cp->params, *c, cp->dprf_sk, *own,
                                             rr.requester + 1, rng_);
    send(rr.requester,
         RecoveryResponse{rr.request_digest, rr.key, id_, std::move(rs)});
  } catch (const std::exception&) {
    // Our share cannot contribute to this target; stay silent.
  }
}

void Replica::handle_recovery_response(const RecoveryResponse& resp,
                                       std::uint64_t now) {
  auto it = recoveries_.find(resp.request_digest);
  if (it == recoveries_.end() || it->second.faulted) return;
  PendingRecovery& rec = it->second;
  std::uint32_t client = 0;
  const CommitmentVec* c = commitment_for(resp.request_digest, &client);
  if (!c) return;
  ClientParams* cp = params_for(client);
  if (!cp) return;
  std::uint32_t target = id_ + 1;
  if (!savss_recover_verify(cp->params, *c, resp.rs, target)) return;
  rec.responses[resp.rs.contributor] = resp.rs;
  if (rec.responses.size() < cfg_.k()) return;
  RecoverResult res = savss_recover(cp->params, *c, rec.responses, target);
  switch (res.status) {
    case RecoverResult::Status::Ok: {
      ShareVec share = std::move(*res.share);
      if (auto pe = pub_.find(rec.key);
          pe != pub_.end() && pe->second.request_digest == resp.request_digest)
        priv_[rec.key] = share;
      for (auto& [seq, e] : log_) {
        if (e.have_pre && e.digest == resp.request_digest) {
          pending_shares_[resp.request_digest] = share;
          e.share_ok = true;
          maybe_prepare(e, now);
        }
      }
      recoveries_.erase(it);
      break;
    }
    case RecoverResult::Status::Insufficient:
      break;  // wait for more contributions
    case RecoverResult::Status::DealerFault: {
      rec.faulted = true;
      rec.evidence = res.fault;
      if (std::find(dealer_faults_.begin(), dealer_faults_.end(),
                    resp.request_digest) == dealer_faults_.end())
        dealer_faults_.push_back(resp.request_digest);
      broadcast(ExposeRequest{resp.request_digest, rec.key, id_,
                              *res.fault});
      // The fault is proven, so ordering may proceed without the share.
      for (auto& [seq, e] : log_)
        if (e.have_pre && e.digest == resp.request_digest)
          maybe_prepare(e, now);
      break;
    }
  }
}

// ---- dealer exposure ----

void Replica::handle_expose_request(const ExposeRequest& er,
                                    std::uint64_t now) {
  std::uint32_t client = 0;
  const CommitmentVec* c = commitment_for(er.request_digest, &client);
  if (!c) return;
  ClientParams* cp = params_for(client);
  if (!cp || !savss_fault_valid(cp->params, *c, er.evidence)) return;
  auto& rec = recoveries_[er.request_digest];
  if (rec.key.empty()) {
    rec.key = er.key;
    rec.client = client;
    rec.started = now;
  }
  rec.faulted = true;
  if (!rec.evidence) rec.evidence = er.evidence;
  if (std::find(dealer_faults_.begin(), dealer_faults_.end(),
                er.request_digest) == dealer_faults_.end())
    dealer_faults_.push_back(er.request_digest);
  if (const ShareVec* own = own_share_for(er.request_digest);
      own && own->is_dealt() && own->entries[0]) {
    rec.reveals[own->index] = *own->entries[0];
    broadcast(ExposeReply{er.request_digest, er.key, id_, *own->entries[0]});
  }
  for (auto& [seq, e] : log_)
    if (e.have_pre && e.digest == er.request_digest) maybe_prepare(e, now);
  try_expose(rec);
}

void Replica::handle_expose_reply(const ExposeReply& er, std::uint64_t now) {
  std::uint32_t client = 0;
  const CommitmentVec* c = commitment_for(er.request_digest, &client);
  if (!c) return;
  ClientParams* cp = params_for(client);
  if (!cp) return;
  if (er.entry0.index != er.replica + 1) return;
  if (!vss::vss_verify(cp->params.vss, c->entries[0], er.entry0)) return;
  auto& rec = recoveries_[er.request_digest];
  if (rec.key.empty()) {
    rec.key = er.key;
    rec.client = client;
    rec.started = now;
  }
  rec.reveals[er.entry0.index] = er.entry0;
  try_expose(rec);
}

void Replica::try_expose(PendingRecovery& rec) {
  if (!rec.faulted || !rec.evidence) return;
  if (rec.reveals.size() < cfg_.k()) return;
  ClientParams* cp = params_for(rec.client);
  const CommitmentVec* c = nullptr;
  if (auto it = pub_.find(rec.key); it != pub_.end() && it->second.commitment)
    c = &*it->second.commitment;
  if (!c)
    for (const auto& [seq, e] : log_)
      if (e.have_pre && e.pre.req.key == rec.key &&
          !e.pre.req.commitment.entries.empty())
        c = &e.pre.req.commitment;
  if (!cp || !c) return;
  auto poly = savss_expose_dealer(cp->params, *c, *rec.evidence, rec.reveals);
  if (poly) exposed_[rec.key] = poly->eval(Fr::zero());
}

// ---- checkpoints and state transfer ----

std::vector<std::uint8_t> Replica::encode_snapshot() const {
  std::vector<std::uint8_t> out;
  put_u32(out, (std::uint32_t)pub_.size());
  for (const auto& [key, pe] : pub_) {
    put_str(out, key);
    put_u32(out, pe.owner);
    put_u32(out, (std::uint32_t)pe.acl.size());
    for (std::uint32_t a : pe.acl) put_u32(out, a);
    put_u8(out, pe.commitment.has_value());
    if (pe.commitment) put_blob(out, pe.commitment->to_bytes());
    put_u8(out, pe.plain_value.has_value());
    if (pe.plain_value) put_fr(out, *pe.plain_value);
    put_u64(out, pe.reqseq);
    put_u64(out, pe.seq);
    put_digest(out, pe.request_digest);
  }
  put_u32(out, (std::uint32_t)exposed_.size());
  for (const auto& [key, v] : exposed_) {
    put_str(out, key);
    put_fr(out, v);
  }
  return out;
}

bool Replica::apply_snapshot(std::span<const std::uint8_t> in) {
  Reader r{in};
  std::map<std::string, PubEntry> pub;
  std::map<std::string, Fr> exposed;
  std::size_t np = r.u32();
  for (std::size_t i = 0; i < np && r.ok; ++i) {
    std::string key = r.str();
    PubEntry pe;
    pe.owner = r.u32();
    std::size_t na = r.u32();
    if (na > 1u << 16) return false;
    for (std::size_t j = 0; j < na && r.ok; ++j) pe.acl.push_back(r.u32());
    if (r.u8()) {
      auto c = CommitmentVec::from_bytes(r.blob());
      if (!r.ok || !c) return false;
      pe.commitment = *c;
    }
    if (r.u8()) pe.plain_value = r.fr();
    pe.reqseq = r.u64();
    pe.seq = r.u64();
    pe.request_digest = rd_digest(r);
    pub[key] = std::move(pe);
  }
  std::size_t ne = r.u32();
  for (std::size_t i = 0; i < ne && r.ok; ++i) {
    std::string key = r.str();
    exposed[key] = r.fr();
  }
  if (!r.done()) return false;
  // Private shares survive only for keys whose sharing is unchanged.
  for (auto it = priv_.begin(); it != priv_.end();) {
    auto old_it = pub_.find(it->first);
    auto new_it = pub.find(it->first);
    bool keep = old_it != pub_.end() && new_it != pub.end() &&
                old_it->second.request_digest == new_it->second.request_digest;
    it = keep ? std::next(it) : priv_.erase(it);
  }
  pub_ = std::move(pub);
  exposed_ = std::move(exposed);
  return true;
}

void Replica::make_checkpoint(std::uint64_t seq) {
  auto snapshot = encode_snapshot();
  Digest d = checkpoint_digest(seq, snapshot);
  checkpoint_snapshots_[seq] = std::move(snapshot);
  while (checkpoint_snapshots_.size() > 2)
    checkpoint_snapshots_.erase(checkpoint_snapshots_.begin());
  CheckpointMsg cp{seq, d, id_, {}};
  cp.sig = signer_.sign(id_, checkpoint_sig_payload(seq, d, id_));
  checkpoints_[seq][id_] = cp;
  broadcast(cp);
  try_stabilize(seq);
}

void Replica::handle_checkpoint(const CheckpointMsg& cp) {
  if (cp.seq <= stable_seq_ || cp.replica >= cfg_.n) return;
  if (!signer_.verify(cp.replica,
                      checkpoint_sig_payload(cp.seq, cp.digest, cp.replica),
                      cp.sig))
    return;
  checkpoints_[cp.seq][cp.replica] = cp;
  try_stabilize(cp.seq);
}

void Replica::try_stabilize(std::uint64_t seq) {
  auto it = checkpoints_.find(seq);
  if (it == checkpoints_.end()) return;
  // Majority digest at this seq.
  std::map<Digest, std::vector<CheckpointMsg>> by_digest;
  for (const auto& [r, cp] : it->second) by_digest[cp.digest].push_back(cp);
  for (auto& [d, msgs] : by_digest) {
    if (msgs.size() < cfg_.quorum()) continue;
    auto own = checkpoint_snapshots_.find(seq);
    if (last_executed_ >= seq && own != checkpoint_snapshots_.end() &&
        checkpoint_digest(seq, own->second) == d) {
      stable_seq_ = seq;
      stable_digest_ = d;
      msgs.resize(cfg_.quorum());
      stable_proof_ = msgs;
      log_.erase(log_.begin(), log_.upper_bound(seq));
      checkpoints_.erase(checkpoints_.begin(), checkpoints_.upper_bound(seq));
      if (is_leader()) next_seq_ = std::max(next_seq_, seq + 1);
    } else if (last_executed_ < seq && !state_transfer_inflight_) {
      // A quorum certified state we have not reached: fetch it.
      state_transfer_inflight_ = true;
      send(msgs.front().replica, StateTransferRequest{last_executed_, id_});
    }
    return;
  }
}

void Replica::handle_state_request(const StateTransferRequest& req) {
  if (req.requester >= cfg_.n || stable_seq_ <= req.have_seq) return;
  auto it = checkpoint_snapshots_.find(stable_seq_);
  if (it == checkpoint_snapshots_.end()) return;
  send(req.requester,
       StateTransferResponse{stable_seq_, stable_proof_, it->second, id_});
}

void Replica::handle_state_response(const StateTransferResponse& resp,
                                    std::uint64_t now) {
  state_transfer_inflight_ = false;
  if (resp.stable_seq <= last_executed_) return;
  // 2f+1 distinct signed checkpoints over the same digest.
  std::map<std::uint32_t, Digest> seen;
  for (const CheckpointMsg& cp : resp.checkpoint_proof) {
    if (cp.seq != resp.stable_seq || cp.replica >= cfg_.n) return;
    if (!signer_.verify(cp.replica,
                        checkpoint_sig_payload(cp.seq, cp.digest, cp.replica),
                        cp.sig))
      return;
    seen[cp.replica] = cp.digest;
  }
  if (seen.size() < cfg_.quorum()) return;
  Digest d = seen.begin()->second;
  for (const auto& [r, dd] : seen)
    if (!(dd == d)) return;
  if (!(checkpoint_digest(resp.stable_seq, resp.snapshot) == d)) return;
  if (!apply_snapshot(resp.snapshot)) return;
  last_executed_ = resp.stable_seq;
  stable_seq_ = resp.stable_seq;
  stable_digest_ = d;
  stable_proof_ = resp.checkpoint_proof;
  checkpoint_snapshots_[stable_seq_] = resp.snapshot;
  while (checkpoint_snapshots_.size() > 2)
    checkpoint_snapshots_.erase(checkpoint_snapshots_.begin());
  log_.erase(log_.begin(), log_.upper_bound(stable_seq_));
  for (auto it = request_first_seen_.begin();
       it != request_first_seen_.end();) {
    // Requests resolved by the snapshot no longer count as pending.
    bool resolved = false;
    for (const auto& [key, pe] : pub_)
      if (pe.request_digest == it->first) resolved = true;
    it = resolved ? request_first_seen_.erase(it) : std::next(it);
  }
  if (is_leader()) next_seq_ = std::max(next_seq_, stable_seq_ + 1);
  progress_deadline_.reset();
  maybe_execute(now);
}

// ---- view changes ----

void Replica::start_view_change(std::uint32_t new_view, std::uint64_t now) {
  if (new_view <= view_) return;
  view_changing_ = true;
  pending_view_ = new_view;
  progress_deadline_ = now + cfg_.viewchange_timeout;
  ViewChange vc;
  vc.new_view = new_view;
  vc.replica = id_;
  vc.stable_seq = stable_seq_;
  vc.stable_digest = stable_digest_;
  for (const auto& [seq, e] : log_) {
    if (!e.have_pre || seq <= stable_seq_) continue;
    if (e.status == LogEntry::St::PrePrepared) continue;
    VcEntry ve;
    ve.pre = e.pre;
    ve.committed = e.status != LogEntry::St::Prepared;
    if (ve.committed) ve.commit_cert = e.commit_cert;
    vc.entries.push_back(std::move(ve));
  }
  view_changes_[new_view][id_] = vc;
  broadcast(vc);
  handle_view_change(vc, now);  // a leader-elect may already have a quorum
}

void Replica::handle_view_change(const ViewChange& vc, std::uint64_t now) {
  if (vc.new_view <= view_ || vc.replica >= cfg_.n) return;
  view_changes_[vc.new_view][vc.replica] = vc;
  // Join once f+1 peers want out of the current view: at least one is honest.
  if ((!view_changing_ || pending_view_ < vc.new_view) &&
      view_changes_[vc.new_view].size() >= cfg_.f + 1)
    start_view_change(vc.new_view, now);
  // The join above can recurse all the way into adopting a new view, which
  // prunes view_changes_; re-validate before touching the set again.
  if (vc.new_view <= view_) return;
  auto set_it = view_changes_.find(vc.new_view);
  if (set_it == view_changes_.end()) return;
  auto& set = set_it->second;
  if (leader_of(vc.new_view) != id_ || set.size() < cfg_.quorum()) return;
  if (!set.count(id_)) return;  // must have joined ourselves first
  // Assemble the new-view message.
  NewView nv;
  nv.view = vc.new_view;
  std::uint64_t max_stable = 0;
  for (const auto& [r, v] : set) {
    if (nv.proof.size() < cfg_.quorum()) nv.proof.push_back(v);
    max_stable = std::max(max_stable, v.stable_seq);
  }
  std::map<std::uint64_t, const VcEntry*> chosen;
  for (const ViewChange& v : nv.proof) {
    for (const VcEntry& e : v.entries) {
      if (e.pre.seq <= max_stable) continue;
      auto [it, inserted] = chosen.emplace(e.pre.seq, &e);
      if (inserted) continue;
      const VcEntry* cur = it->second;
      // Committed beats prepared; otherwise the highest pre-prepare view.
      if ((e.committed && !cur->committed) ||
          (e.committed == cur->committed && e.pre.view > cur->pre.view))
        it->second = &e;
    }
  }
  std::uint64_t max_seq = chosen.empty() ? max_stable : chosen.rbegin()->first;
  for (std::uint64_t seq = max_stable + 1; seq <= max_seq; ++seq) {
    PrePrepare pp;
    pp.view = nv.view;
    pp.seq = seq;
    if (auto it = chosen.find(seq); it != chosen.end())
      pp.req = it->second->pre.req;
    // else: no-op filler request (empty key)
    nv.leader_log.push_back(std::move(pp));
  }
  broadcast(nv);
  handle_new_view(id_, nv, now);
}

void Replica::handle_new_view(std::uint32_t sender, const NewView& nv,
                              std::uint64_t now) {
  if (nv.view <= view_ || sender != leader_of(nv.view)) return;
  std::map<std::uint32_t, bool> distinct;
  for (const ViewChange& vc : nv.proof)
    if (vc.new_view == nv.view && vc.replica < cfg_.n)
      distinct[vc.replica] = true;
  if (distinct.size() < cfg_.quorum()) return;
  // Safety: every request we have committed locally must be replayed.
  for (const auto& [seq, e] : log_) {
    if (!e.have_pre || seq <= stable_seq_) continue;
    if (e.status != LogEntry::St::Committed &&
        e.status != LogEntry::St::Executed)
      continue;
    bool found = false;
    for (const PrePrepare& pp : nv.leader_log)
      if (pp.seq == seq && pp.req.digest() == e.digest) found = true;
    if (!found && seq > last_executed_) {
      start_view_change(nv.view + 1, now);
      return;
    }
    if (!found && seq <= last_executed_) return;  // leader is behind us
  }
  view_ = nv.view;
  view_changing_ = false;
  pending_view_ = 0;
  view_changes_.erase(view_changes_.begin(),
                      view_changes_.upper_bound(view_));
  // Drop uncommitted entries the new leader does not replay, then rebuild
  // the rest in the new view. Prepares/commits buffered for a seq survive:
  // quorum counting only trusts digest matches anyway.
  std::uint64_t max_seq = stable_seq_;
  std::map<std::uint64_t, const PrePrepare*> replay;
  for (const PrePrepare& pp : nv.leader_log) {
    max_seq = std::max(max_seq, pp.seq);
    replay[pp.seq] = &pp;
  }
  for (auto it = log_.begin(); it != log_.end();) {
    bool uncommitted = it->second.status == LogEntry::St::PrePrepared ||
                       it->second.status == LogEntry::St::Prepared;
    bool stale = uncommitted && !replay.count(it->first);
    if (stale) requeue_request(it->second.pre.req);
    it = stale ? log_.erase(it) : std::next(it);
  }
  for (const auto& [seq, ppp] : replay) {
    const PrePrepare& pp = *ppp;
    if (seq <= last_executed_ || seq <= stable_seq_) continue;
    auto& e = log_[seq];
    Digest d = pp.req.digest();
    if (e.have_pre && e.digest == d &&
        (e.status == LogEntry::St::Committed ||
         e.status == LogEntry::St::Executed))
      continue;
    bool keep_share_ok = e.have_pre && e.digest == d && e.share_ok;
    if (e.have_pre && !(e.digest == d)) {
      requeue_request(e.pre.req);
      e.prepares.clear();
      e.commits.clear();
    }
    e.pre = pp;
    e.have_pre = true;
    e.digest = d;
    e.status = LogEntry::St::PrePrepared;
    e.prepare_sent = false;
    e.commit_cert.clear();
    e.share_ok = keep_share_ok;
    if (!pp.req.key.empty()) request_first_seen_.emplace(e.digest, now);
    if (!e.share_ok) attach_share(e, now);
    maybe_prepare(e, now);
  }
  if (is_leader()) {
    next_seq_ = std::max(next_seq_, max_seq + 1);
    assign_from_queue(now);
  }
  progress_deadline_.reset();
  maybe_execute(now);
}

}  // namespace avss::kvstore
