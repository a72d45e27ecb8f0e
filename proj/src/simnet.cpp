#include "avss/simnet.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace avss::simnet {

namespace kv = avss::kvstore;
using avss::savss::SavssKeys;
using avss::savss::SavssSharing;
using avss::savss::ShareVec;
using avss::savss::savss_init;
using avss::savss::savss_reconstruct;
using avss::savss::savss_share;
using avss::savss::savss_verify;
using avss::vss::VssShare;

// ---------------------------------------------------------------------------
// Scenario parsing
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

bool to_u64(const std::string& s, std::uint64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoull(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool to_u32(const std::string& s, std::uint32_t& out) {
  std::uint64_t v;
  if (!to_u64(s, v) || v > 0xffffffffull) return false;
  out = (std::uint32_t)v;
  return true;
}

}  // namespace

std::optional<Scenario> Scenario::parse(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = tokenize(line);
    if (t.empty()) continue;
    const std::string& cmd = t[0];
    if (cmd == "name" && t.size() == 2) {
      s.name = t[1];
    } else if (cmd == "seed" && t.size() == 2) {
      if (!to_u64(t[1], s.seed)) return std::nullopt;
    } else if (cmd == "f" && t.size() == 2) {
      if (!to_u32(t[1], s.f) || s.f == 0) return std::nullopt;
    } else if (cmd == "scheme" && t.size() == 2) {
      if (t[1] == "pedersen") s.scheme = Scheme::Pedersen;
      else if (t[1] == "kzg") s.scheme = Scheme::Kzg;
      else return std::nullopt;
    } else if (cmd == "delta" && t.size() == 2) {
      if (!to_u64(t[1], s.delta) || s.delta == 0) return std::nullopt;
    } else if (cmd == "sharing" && t.size() == 2) {
      if (t[1] == "on") s.sharing = true;
      else if (t[1] == "off") s.sharing = false;
      else return std::nullopt;
    } else if (cmd == "duration" && t.size() == 2) {
      if (!to_u64(t[1], s.duration)) return std::nullopt;
    } else if (cmd == "checkpoint" && t.size() == 2) {
      if (!to_u64(t[1], s.checkpoint) || s.checkpoint == 0)
        return std::nullopt;
    } else if (cmd == "window" && t.size() == 2) {
      if (!to_u32(t[1], s.window) || s.window == 0) return std::nullopt;
    } else if (cmd == "corrupt") {
      for (std::size_t i = 1; i < t.size(); ++i) {
        std::uint32_t r;
        if (!to_u32(t[i], r)) return std::nullopt;
        s.corrupt.push_back(r);
      }
    } else if (cmd == "op" && t.size() >= 4) {
      ClientOp op;
      if (t[1] == "put") op.kind = ClientOp::Kind::Put;
      else if (t[1] == "get") op.kind = ClientOp::Kind::Get;
      else if (t[1] == "acl") op.kind = ClientOp::Kind::AclSet;
      else return std::nullopt;
      if (!to_u32(t[2], op.client)) return std::nullopt;
      op.key = t[3];
      std::size_t i = 4;
      while (i < t.size()) {
        if (t[i] == "allow" && op.kind == ClientOp::Kind::AclSet) {
          for (++i; i < t.size() && t[i] != "after"; ++i) {
            std::uint32_t c;
            if (!to_u32(t[i], c)) return std::nullopt;
            op.acl.push_back(c);
          }
        } else if (t[i] == "after" && i + 1 < t.size()) {
          if (!to_u64(t[i + 1], op.not_before)) return std::nullopt;
          i += 2;
        } else {
          return std::nullopt;
        }
      }
      s.ops.push_back(std::move(op));
    } else if (cmd == "fault" && t.size() >= 2) {
      FaultSpec fs;
      const std::string& kind = t[1];
      if (kind == "crash" || kind == "equivocate" || kind == "garbage") {
        // fault crash <replica> at <tick>
        if (t.size() != 5 || t[3] != "at") return std::nullopt;
        fs.kind = kind == "crash"        ? FaultSpec::Kind::Crash
                  : kind == "equivocate" ? FaultSpec::Kind::EquivocateLeader
                                         : FaultSpec::Kind::GarbageReply;
        if (!to_u32(t[2], fs.replica) || !to_u64(t[4], fs.at))
          return std::nullopt;
      } else if (kind == "partition") {
        // fault partition <replica> from <tick> until <tick>
        if (t.size() != 7 || t[3] != "from" || t[5] != "until")
          return std::nullopt;
        fs.kind = FaultSpec::Kind::Partition;
        if (!to_u32(t[2], fs.replica) || !to_u64(t[4], fs.at) ||
            !to_u64(t[6], fs.until) || fs.until <= fs.at)
          return std::nullopt;
      } else if (kind == "byzantine-dealer" || kind == "drop-share") {
        // fault byzantine-dealer client <c> key <k> replica <r>
        if (t.size() != 8 || t[2] != "client" || t[4] != "key" ||
            t[6] != "replica")
          return std::nullopt;
        fs.kind = kind == "drop-share" ? FaultSpec::Kind::DropShare
                                       : FaultSpec::Kind::ByzantineDealer;
        if (!to_u32(t[3], fs.client) || !to_u32(t[7], fs.replica))
          return std::nullopt;
        fs.key = t[5];
      } else {
        return std::nullopt;
      }
      s.faults.push_back(std::move(fs));
    } else {
      return std::nullopt;
    }
  }
  return s;
}

std::optional<Scenario> Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  auto s = parse(buf.str());
  if (s && s->name.empty()) s->name = path;
  return s;
}

// ---------------------------------------------------------------------------
// Byzantine dealer: re-pin one masking value away from the DPRF output while
// keeping the sharing self-consistent (dealt shares still verify).
// ---------------------------------------------------------------------------

namespace {

void corrupt_slot(SavssSharing& sh, const Polynomial& delta, std::uint32_t j,
                  const vss::VssParams& vp) {
  vss::Sharing d = vss::vss_share_with_blinding(delta, Polynomial{}, vp);
  sh.commitment.entries[j] =
      vss::vss_combine_commitments(sh.commitment.entries[j], d.commitment);
  for (auto& share : sh.shares) {
    VssShare& e = *share.entries[j];
    const VssShare& x = d.shares[share.index - 1];
    e.value += x.value;
    e.blind += x.blind;
    e.witness = e.witness + x.witness;
  }
}

// 1 at the target, 0 at every other pinned index of the target's group.
Polynomial unit_bump(const SavssParams& params, std::uint32_t target) {
  std::uint32_t j = params.group_of(target);
  Polynomial p = Polynomial::from_coeffs({Fr::one()});
  for (std::uint32_t i = (j - 1) * (params.k - 1) + 1;
       i <= j * (params.k - 1) && i <= params.n; ++i) {
    if (i == target) continue;
    std::vector<Fr> c(p.coeffs.size() + 1, Fr::zero());
    for (std::size_t t = 0; t < p.coeffs.size(); ++t) {
      c[t + 1] += p.coeffs[t];
      c[t] -= p.coeffs[t] * Fr::from_u64(i);
    }
    p = Polynomial::from_coeffs(c);
  }
  Fr scale = p.eval(Fr::from_u64(target)).inverse();
  for (auto& v : p.coeffs) v *= scale;
  return p;
}

// Per-message processing cost in ticks (the simulator's replica busy-time
// model; only messages delivered to replicas are charged).
std::uint64_t msg_cost(const Message& m, bool sharing) {
  struct V {
    bool sharing;
    std::uint64_t operator()(const kv::ClientRequest&) const { return 1; }
    std::uint64_t operator()(const kv::PutShare&) const {
      return sharing ? 6 : 1;
    }
    std::uint64_t operator()(const kv::PutAck&) const { return 1; }
    std::uint64_t operator()(const kv::GetReply&) const { return 1; }
    std::uint64_t operator()(const kv::PrePrepare& p) const {
      return p.req.commitment.entries.empty() ? 2 : 4;
    }
    std::uint64_t operator()(const kv::Prepare&) const { return 1; }
    std::uint64_t operator()(const kv::CommitMsg&) const { return 1; }
    std::uint64_t operator()(const kv::RecoveryRequest&) const { return 10; }
    std::uint64_t operator()(const kv::RecoveryResponse&) const { return 6; }
    std::uint64_t operator()(const kv::ExposeRequest&) const { return 8; }
    std::uint64_t operator()(const kv::ExposeReply&) const { return 4; }
    std::uint64_t operator()(const kv::CheckpointMsg&) const { return 1; }
    std::uint64_t operator()(const kv::ViewChange&) const { return 3; }
    std::uint64_t operator()(const kv::NewView&) const { return 4; }
    std::uint64_t operator()(const kv::StateTransferRequest&) const {
      return 1;
    }
    std::uint64_t operator()(const kv::StateTransferResponse&) const {
      return 4;
    }
  };
  return std::visit(V{sharing}, m);
}

const char* msg_name(const Message& m) {
  static const char* names[] = {
      "client-request", "put-share",      "put-ack",        "get-reply",
      "pre-prepare",    "prepare",        "commit",         "recovery-req",
      "recovery-resp",  "expose-req",     "expose-reply",   "checkpoint",
      "view-change",    "new-view",       "state-req",      "state-resp"};
  return names[m.index()];
}

std::string fr_tag(const Fr& v) {
  std::array<std::uint8_t, 32> b;
  v.to_bytes(b);
  char buf[17];
  for (int i = 0; i < 8; ++i)
    std::snprintf(buf + 2 * i, 3, "%02x", b[24 + i]);
  return std::string(buf, 16);
}

}  // namespace

// ---------------------------------------------------------------------------
// The event loop
// ---------------------------------------------------------------------------

namespace {

struct Packet {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;  // FIFO tiebreak
  std::uint32_t src = 0, dst = 0;
  std::vector<std::uint8_t> bytes;
};
struct PacketLater {
  bool operator()(const Packet& a, const Packet& b) const {
    return std::tie(a.tick, a.seq) > std::tie(b.tick, b.seq);
  }
};

struct ClientState {
  std::uint32_t id = 0;
  std::vector<ClientOp> ops;
  std::size_t next = 0;
  std::uint64_t reqseq = 0;
  bool busy = false;
  std::size_t rec = 0;  // index into trace.ops for the op in flight
  std::set<std::uint32_t> acks;
  std::map<std::uint32_t, kv::GetReply> replies;
};

}  // namespace

RunResult run_scenario(const Scenario& s) {
  const std::uint32_t n = s.n(), f = s.f, k = s.k();
  if (s.corrupt.size() > f)
    throw std::invalid_argument("corrupt set larger than f");
  std::set<std::uint32_t> byz;
  for (const FaultSpec& fs : s.faults)
    if (fs.kind == FaultSpec::Kind::EquivocateLeader ||
        fs.kind == FaultSpec::Kind::GarbageReply)
      byz.insert(fs.replica);
  std::set<std::uint32_t> byz_dealers;
  for (const FaultSpec& fs : s.faults)
    if (fs.kind == FaultSpec::Kind::ByzantineDealer)
      byz_dealers.insert(fs.client);
  if (byz.size() > f)
    throw std::invalid_argument("more than f Byzantine replicas");
  for (std::uint32_t c : s.corrupt)
    if (c >= n) throw std::invalid_argument("corrupt id out of range");
  for (const FaultSpec& fs : s.faults)
    if (fs.replica >= n)
      throw std::invalid_argument("fault target out of range");

  RunResult out;
  out.n = n;
  out.f = f;
  out.k = k;

  Entropy master(s.seed);
  Entropy net_rng = master.fork("net");
  kv::Signer signer(master.fork("mac").next_u64());

  // Clients present in the workload, each with its own sharing parameters.
  std::set<std::uint32_t> client_ids;
  for (const ClientOp& op : s.ops) client_ids.insert(op.client);
  std::map<std::uint32_t, SavssKeys> client_keys;
  std::map<std::uint32_t, Entropy> client_rng;
  for (std::uint32_t c : client_ids) {
    Entropy init = master.fork("client-init");
    client_keys.emplace(c, savss_init(k, n, s.scheme, init));
    client_rng.emplace(c, master.fork("client-rng"));
    out.client_params.emplace(c, client_keys.at(c).params);
  }
  for (const ClientOp& op : s.ops)
    if (op.kind == ClientOp::Kind::Put && !out.key_owner.count(op.key))
      out.key_owner[op.key] = op.client;

  kv::Config cfg;
  cfg.n = n;
  cfg.f = f;
  cfg.sharing = s.sharing;
  cfg.checkpoint_period = s.checkpoint;
  cfg.window = s.window;
  cfg.recovery_timeout = 4 * (1 + s.delta);  // ~2 round trips
  cfg.viewchange_timeout = 40 * (1 + s.delta);

  std::vector<kv::Replica> replicas;
  replicas.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    std::map<std::uint32_t, kv::ClientParams> cp;
    for (auto& [c, keys] : client_keys)
      cp.emplace(c, kv::ClientParams{keys.params, keys.dprf_sks[r]});
    replicas.emplace_back(r, cfg, signer, std::move(cp),
                          master.fork("replica-rng").next_u64());
  }

  std::map<std::uint32_t, ClientState> clients;
  for (std::uint32_t c : client_ids) {
    ClientState cs;
    cs.id = c;
    for (const ClientOp& op : s.ops)
      if (op.client == c) cs.ops.push_back(op);
    clients.emplace(c, std::move(cs));
  }

  std::priority_queue<Packet, std::vector<Packet>, PacketLater> queue;
  std::uint64_t pkt_seq = 0;
  std::vector<std::uint64_t> next_free(n, 0);
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> partitions(
      n);
  for (const FaultSpec& fs : s.faults)
    if (fs.kind == FaultSpec::Kind::Partition)
      partitions[fs.replica].push_back({fs.at, fs.until});

  auto partition_end = [&](std::uint32_t party,
                           std::uint64_t t) -> std::uint64_t {
    if (party >= n) return 0;
    std::uint64_t end = 0;
    for (auto [from, until] : partitions[party])
      if (t >= from && t < until) end = std::max(end, until);
    return end;  // 0 = not partitioned
  };

  auto enqueue = [&](std::uint64_t now, std::uint32_t src, std::uint32_t dst,
                     const Message& msg) {
    kv::Envelope env{src, msg};
    auto payload = env.payload_bytes();
    auto bytes = env.to_bytes(signer.sign(src, payload));
    std::uint64_t delay = 1 + net_rng.below(s.delta);
    queue.push({now + delay, pkt_seq++, src, dst, std::move(bytes)});
    out.trace.messages.push_back({now, src, dst, msg});
  };

  auto replica_send = [&](std::uint64_t now, std::uint32_t src,
                          const kv::Outgoing& o) {
    if (o.dest == kv::kBroadcast) {
      for (std::uint32_t r = 0; r < n; ++r)
        if (r != src) enqueue(now, src, r, o.msg);
    } else {
      enqueue(now, src, o.dest, o.msg);
    }
  };

  auto drain_replica = [&](std::uint32_t r, std::uint64_t now) {
    for (const kv::Outgoing& o : replicas[r].drain()) replica_send(now, r, o);
  };

  // ---- client behaviour ----

  auto complete_op = [&](ClientState& cs, std::uint64_t now,
                         OpRecord::Result res, std::optional<Fr> got) {
    OpRecord& rec = out.trace.ops[cs.rec];
    rec.complete = now;
    rec.result = res;
    rec.got = got;
    cs.busy = false;
    cs.acks.clear();
    cs.replies.clear();
  };

  auto issue_op = [&](ClientState& cs, std::uint64_t now) {
    const ClientOp& op = cs.ops[cs.next++];
    cs.busy = true;
    cs.reqseq++;
    OpRecord rec;
    rec.op = op;
    rec.invoke = now;
    kv::Request req;
    req.key = op.key;
    req.client = cs.id;
    req.reqseq = cs.reqseq;
    std::uint32_t sender = kv::kClientBase + cs.id;
    std::vector<kv::PutShare> shares;
    switch (op.kind) {
      case ClientOp::Kind::Put: {
        req.kind = kv::Request::Kind::Put;
        Entropy& rng = client_rng.at(cs.id);
        Fr value = rng.scalar();
        rec.put_value = value;
        if (s.sharing) {
          std::vector<Fr> coeffs(k);
          coeffs[0] = value;
          for (std::uint32_t i = 1; i < k; ++i) coeffs[i] = rng.scalar();
          Polynomial poly = Polynomial::from_coeffs(coeffs);
          SavssSharing sh = savss_share(poly, client_keys.at(cs.id), rng);
          std::set<std::uint32_t> withhold;
          for (const FaultSpec& fs : s.faults) {
            if (fs.client != cs.id || fs.key != op.key) continue;
            if (fs.kind == FaultSpec::Kind::DropShare) {
              withhold.insert(fs.replica);
            } else if (fs.kind == FaultSpec::Kind::ByzantineDealer) {
              const SavssParams& p = client_keys.at(cs.id).params;
              std::uint32_t target = fs.replica + 1;
              corrupt_slot(sh, unit_bump(p, target), p.group_of(target),
                           p.vss);
              withhold.insert(fs.replica);
            }
          }
          req.commitment = sh.commitment;
          Digest d = req.digest();
          for (std::uint32_t r = 0; r < n; ++r) {
            if (withhold.count(r)) continue;
            shares.push_back(
                {op.key, cs.id, cs.reqseq, d, sh.shares[r]});
          }
        } else {
          req.plain_value = value;
        }
        break;
      }
      case ClientOp::Kind::Get:
        req.kind = kv::Request::Kind::Get;
        break;
      case ClientOp::Kind::AclSet:
        req.kind = kv::Request::Kind::AclSet;
        req.acl = op.acl;
        break;
    }
    cs.rec = out.trace.ops.size();
    out.trace.ops.push_back(std::move(rec));
    for (std::uint32_t r = 0; r < n; ++r)
      enqueue(now, sender, r, kv::ClientRequest{req});
    for (kv::PutShare& ps : shares) {
      std::uint32_t r = ps.share.index - 1;
      enqueue(now, sender, r, std::move(ps));
    }
  };

  auto client_check_get = [&](ClientState& cs, std::uint64_t now) {
    const OpRecord& rec = out.trace.ops[cs.rec];
    std::uint32_t denied = 0, missing = 0;
    std::map<std::string, std::uint32_t> plain_votes;  // keyed by value tag
    std::optional<Fr> plain;
    for (const auto& [r, rep] : cs.replies) {
      if (rep.denied) {
        ++denied;
      } else if (!rep.commitment && !rep.share && !rep.plain_value) {
        ++missing;
      } else if (rep.plain_value) {
        std::string tag = fr_tag(*rep.plain_value);
        if (++plain_votes[tag] >= f + 1) plain = rep.plain_value;
      }
    }
    if (denied >= f + 1) return complete_op(cs, now, OpRecord::Result::Denied,
                                            std::nullopt);
    if (missing >= f + 1) return complete_op(cs, now, OpRecord::Result::Missing,
                                             std::nullopt);
    if (plain)
      return complete_op(cs, now, OpRecord::Result::Value, plain);
    // Share path: need a commitment vouched for by f+1 replicas, then k
    // verifying shares under it.
    auto owner_it = out.key_owner.find(rec.op.key);
    if (owner_it == out.key_owner.end()) return;
    const SavssParams& params = out.client_params.at(owner_it->second);
    std::map<std::vector<std::uint8_t>, std::uint32_t> cvotes;
    const CommitmentVec* chosen = nullptr;
    for (const auto& [r, rep] : cs.replies)
      if (rep.commitment &&
          ++cvotes[rep.commitment->to_bytes()] >= f + 1 && !chosen)
        chosen = &*rep.commitment;
    if (!chosen) return;
    std::map<std::uint32_t, ShareVec> good;
    for (const auto& [r, rep] : cs.replies)
      if (rep.share && rep.commitment && *rep.commitment == *chosen &&
          savss_verify(params, *chosen, *rep.share))
        good[rep.share->index] = *rep.share;
    if (good.size() < k) return;
    auto poly = savss_reconstruct(params, *chosen, good);
    if (!poly) return;
    complete_op(cs, now, OpRecord::Result::Value, poly->eval(Fr::zero()));
  };

  auto client_on_message = [&](ClientState& cs, const Message& msg,
                               std::uint64_t now) {
    if (!cs.busy) return;
    const OpRecord& rec = out.trace.ops[cs.rec];
    if (const auto* ack = std::get_if<kv::PutAck>(&msg)) {
      if (ack->key != rec.op.key || ack->reqseq != cs.reqseq) return;
      if (rec.op.kind != ClientOp::Kind::Put &&
          rec.op.kind != ClientOp::Kind::AclSet)
        return;
      cs.acks.insert(ack->replica);
      if (cs.acks.size() >= f + 1)
        complete_op(cs, now, OpRecord::Result::Ok, std::nullopt);
    } else if (const auto* rep = std::get_if<kv::GetReply>(&msg)) {
      if (rep->key != rec.op.key || rep->reqseq != cs.reqseq) return;
      if (rec.op.kind != ClientOp::Kind::Get) return;
      cs.replies[rep->replica] = *rep;
      client_check_get(cs, now);
    }
  };

  // ---- main loop ----

  std::vector<bool> fault_done(s.faults.size(), false);
  std::uint64_t quiesce = 0;
  std::uint64_t t = 0;
  for (; t < s.duration; ++t) {
    for (std::size_t i = 0; i < s.faults.size(); ++i) {
      const FaultSpec& fs = s.faults[i];
      if (fault_done[i] || fs.at > t) continue;
      fault_done[i] = true;
      switch (fs.kind) {
        case FaultSpec::Kind::Crash:
          replicas[fs.replica].crash();
          out.trace.notes.push_back("crash replica " +
                                    std::to_string(fs.replica));
          break;
        case FaultSpec::Kind::EquivocateLeader:
          replicas[fs.replica].set_equivocate(true);
          out.trace.notes.push_back("equivocate replica " +
                                    std::to_string(fs.replica));
          break;
        case FaultSpec::Kind::GarbageReply:
          replicas[fs.replica].set_garbage_replies(true);
          out.trace.notes.push_back("garbage replica " +
                                    std::to_string(fs.replica));
          break;
        default:
          break;  // partition/dealer faults handled elsewhere
      }
    }
    // Clients issue work.
    for (auto& [cid, cs] : clients)
      if (!cs.busy && cs.next < cs.ops.size() &&
          t >= cs.ops[cs.next].not_before)
        issue_op(cs, t);
    // Deliveries due this tick.
    while (!queue.empty() && queue.top().tick <= t) {
      Packet p = queue.top();
      queue.pop();
      std::uint64_t pend =
          std::max(partition_end(p.src, t), partition_end(p.dst, t));
      if (pend > t) {  // delayed, not lost: redelivered after the partition
        p.tick = pend + 1 + net_rng.below(s.delta);
        p.seq = pkt_seq++;
        queue.push(std::move(p));
        continue;
      }
      auto parsed = kv::Envelope::from_bytes(p.bytes);
      if (!parsed) continue;
      auto& [env, sig] = *parsed;
      if (!signer.verify(env.sender, env.payload_bytes(), sig)) continue;
      if (p.dst < n) {
        if (next_free[p.dst] > t) {  // replica busy: processing is serial
          p.tick = next_free[p.dst];
          p.seq = pkt_seq++;
          queue.push(std::move(p));
          continue;
        }
        next_free[p.dst] = t + msg_cost(env.msg, s.sharing);
        replicas[p.dst].on_message(env.sender, env.msg, t);
        drain_replica(p.dst, t);
      } else {
        auto it = clients.find(p.dst - kv::kClientBase);
        if (it != clients.end()) client_on_message(it->second, env.msg, t);
      }
    }
    for (std::uint32_t r = 0; r < n; ++r) {
      replicas[r].on_tick(t);
      drain_replica(r, t);
    }
    // Early stop once the workload is done and the network settles.
    bool done = queue.empty();
    for (auto& [cid, cs] : clients)
      if (cs.busy || cs.next < cs.ops.size()) done = false;
    quiesce = done ? quiesce + 1 : 0;
    if (quiesce > 8 * (1 + s.delta)) {
      ++t;
      break;
    }
  }
  out.ticks_used = t;

  // ---- harvest results ----

  out.all_completed = true;
  for (const OpRecord& rec : out.trace.ops)
    if (rec.result == OpRecord::Result::None) out.all_completed = false;
  for (auto& [cid, cs] : clients)
    if (cs.next < cs.ops.size()) out.all_completed = false;

  std::uint64_t max_le = 0;
  for (std::uint32_t r = 0; r < n; ++r) {
    if (replicas[r].crashed() || byz.count(r)) continue;
    max_le = std::max(max_le, replicas[r].last_executed());
    out.max_pending = std::max(out.max_pending, replicas[r].max_pending_seen());
  }
  out.committed = max_le;
  out.store_digests_equal = true;
  std::optional<Digest> ref;
  for (std::uint32_t r = 0; r < n; ++r) {
    if (replicas[r].crashed() || byz.count(r)) continue;
    if (replicas[r].last_executed() != max_le) continue;
    Digest d = replicas[r].public_store_digest();
    if (!ref) ref = d;
    else if (!(d == *ref)) out.store_digests_equal = false;
  }
  for (std::uint32_t r = 0; r < n; ++r) {
    if (replicas[r].crashed() || byz.count(r)) continue;
    for (const Digest& d : replicas[r].dealer_faults())
      if (std::find(out.dealer_faults.begin(), out.dealer_faults.end(), d) ==
          out.dealer_faults.end())
        out.dealer_faults.push_back(d);
    if (out.exposed.empty()) out.exposed = replicas[r].exposed_values();
  }
  // Commitments for the privacy checker, recovered from the ordered Puts.
  for (const MsgRecord& m : out.trace.messages) {
    if (const auto* pp = std::get_if<kv::PrePrepare>(&m.msg)) {
      if (pp->req.kind == kv::Request::Kind::Put &&
          !pp->req.commitment.entries.empty())
        out.key_commitment[pp->req.key] = pp->req.commitment;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

std::string Trace::export_lines() const {
  std::ostringstream o;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const OpRecord& r = ops[i];
    const char* kind = r.op.kind == ClientOp::Kind::Put     ? "put"
                       : r.op.kind == ClientOp::Kind::Get   ? "get"
                                                             : "acl";
    const char* res = r.result == OpRecord::Result::Ok        ? "ok"
                      : r.result == OpRecord::Result::Value   ? "value"
                      : r.result == OpRecord::Result::Denied  ? "denied"
                      : r.result == OpRecord::Result::Missing ? "missing"
                                                               : "none";
    o << "op " << i << ' ' << kind << " client=" << r.op.client
      << " key=" << r.op.key << " invoke=" << r.invoke
      << " complete=" << r.complete << " result=" << res;
    if (r.put_value) o << " wrote=" << fr_tag(*r.put_value);
    if (r.got) o << " read=" << fr_tag(*r.got);
    o << '\n';
  }
  for (const MsgRecord& m : messages)
    o << "msg t=" << m.tick << " src=" << m.src << " dst=" << m.dst << " "
      << msg_name(m.msg) << '\n';
  for (const std::string& s : notes) o << "note " << s << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// Linearizability: exhaustive per-key search over linearization orders with
// memoization (Wing & Gong style).
// ---------------------------------------------------------------------------

namespace {

struct KeyState {
  bool present = false;
  Fr value;
  std::uint32_t owner = 0;
  std::vector<std::uint32_t> acl;

  std::uint64_t digest() const {
    std::vector<std::uint8_t> b;
    codec::put_u8(b, present);
    if (present) codec::put_fr(b, value);
    codec::put_u32(b, owner);
    for (std::uint32_t a : acl) codec::put_u32(b, a);
    Digest d = sha256(b);
    std::uint64_t h = 0;
    for (int i = 0; i < 8; ++i) h = h << 8 | d[i];
    return h;
  }
};

struct LinOp {
  const OpRecord* rec;
  bool completed;
};

// Applies `op`; returns false when a completed Get's observed result is
// impossible in this state.
bool apply_op(KeyState& st, const LinOp& o) {
  const OpRecord& r = *o.rec;
  switch (r.op.kind) {
    case ClientOp::Kind::Put:
      if (!st.present) {
        st.present = true;
        st.owner = r.op.client;
        st.value = *r.put_value;
      } else if (st.owner == r.op.client) {
        st.value = *r.put_value;  // overwrite keeps the allow-list
      }
      return true;
    case ClientOp::Kind::AclSet:
      if (st.present && st.owner == r.op.client) st.acl = r.op.acl;
      return true;
    case ClientOp::Kind::Get: {
      if (!o.completed) return true;
      OpRecord::Result expect;
      std::optional<Fr> val;
      if (!st.present) {
        expect = OpRecord::Result::Missing;
      } else if (r.op.client != st.owner &&
                 std::find(st.acl.begin(), st.acl.end(), r.op.client) ==
                     st.acl.end()) {
        expect = OpRecord::Result::Denied;
      } else {
        expect = OpRecord::Result::Value;
        val = st.value;
      }
      if (r.result != expect) return false;
      if (val && (!r.got || !(*r.got == *val))) return false;
      return true;
    }
  }
  return true;
}

bool lin_search(const std::vector<LinOp>& ops, std::uint64_t mask,
                std::uint64_t done_target, KeyState st,
                std::set<std::pair<std::uint64_t, std::uint64_t>>& seen) {
  if ((mask & done_target) == done_target) return true;
  if (!seen.insert({mask, st.digest()}).second) return false;
  // An op may linearize next only if it overlaps every still-pending
  // completed op (its invocation precedes their responses).
  std::uint64_t bound = UINT64_MAX;
  for (std::size_t i = 0; i < ops.size(); ++i)
    if (!(mask >> i & 1) && ops[i].completed)
      bound = std::min(bound, ops[i].rec->complete);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (mask >> i & 1) continue;
    if (ops[i].rec->invoke > bound) continue;
    KeyState next = st;
    if (!apply_op(next, ops[i])) continue;
    if (lin_search(ops, mask | 1ull << i, done_target, next, seen)) return true;
  }
  return false;
}

}  // namespace

Verdict check_linearizability(const Trace& t) {
  std::map<std::string, std::vector<LinOp>> by_key;
  for (const OpRecord& r : t.ops) {
    bool completed = r.result != OpRecord::Result::None;
    // Incomplete Gets constrain nothing; incomplete Puts/AclSets may or may
    // not have taken effect and stay in the search as optional ops.
    if (!completed && r.op.kind == ClientOp::Kind::Get) continue;
    by_key[r.op.key].push_back({&r, completed});
  }
  for (auto& [key, ops] : by_key) {
    if (ops.size() > 60)
      return {false, "key " + key + ": too many ops for exhaustive check"};
    std::uint64_t done_target = 0;
    for (std::size_t i = 0; i < ops.size(); ++i)
      if (ops[i].completed) done_target |= 1ull << i;
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    if (!lin_search(ops, 0, done_target, KeyState{}, seen)) {
      std::string hist;
      for (const LinOp& o : ops) {
        const OpRecord& r = *o.rec;
        hist += " [c" + std::to_string(r.op.client) + " " +
                std::to_string(r.invoke) + "-" + std::to_string(r.complete) +
                "]";
      }
      return {false, "key " + key + ": no valid linearization;" + hist};
    }
  }
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Privacy
// ---------------------------------------------------------------------------

Verdict check_privacy(const RunResult& r,
                      const std::vector<std::uint32_t>& corrupt) {
  if (corrupt.size() > r.f) return {false, "corrupt set exceeds f"};
  std::set<std::uint32_t> corr(corrupt.begin(), corrupt.end());
  for (const auto& [key, c] : r.key_commitment) {
    if (r.exposed.count(key)) continue;  // dealer faults forfeit hiding
    auto owner = r.key_owner.find(key);
    if (owner == r.key_owner.end()) continue;
    const SavssParams& params = r.client_params.at(owner->second);
    // Everything the adversary sees: traffic to or from its replicas.
    std::map<std::uint32_t, ShareVec> view;
    auto consider = [&](const std::string& k2, const ShareVec& sv) {
      if (k2 == key && savss_verify(params, c, sv)) view[sv.index] = sv;
    };
    for (const MsgRecord& m : r.trace.messages) {
      if (!corr.count(m.src) && !corr.count(m.dst)) continue;
      if (const auto* ps = std::get_if<kv::PutShare>(&m.msg))
        consider(ps->key, ps->share);
      else if (const auto* gr = std::get_if<kv::GetReply>(&m.msg)) {
        if (gr->share) consider(gr->key, *gr->share);
      }
      // Recovery traffic carries only DPRF-blinded shares; nothing to count.
    }
    if (view.size() >= r.k)
      return {false, "key " + key + ": adversary view holds " +
                         std::to_string(view.size()) + " shares (k=" +
                         std::to_string(r.k) + ")"};
    if (savss_reconstruct(params, c, view))
      return {false, "key " + key + ": adversary view reconstructs"};
  }
  return {true, ""};
}

}  // namespace avss::simnet
