#include "avss/kvstore.hpp"
#include "doctest.h"

using namespace avss::kvstore;
namespace savss = avss::savss;

namespace {

// A real sharing so messages carry structurally valid crypto payloads.
struct Fixture {
  savss::SavssKeys keys;
  savss::SavssSharing sh;
  Fixture() {
    Entropy rng(31);
    keys = savss::savss_init(2, 4, Scheme::Pedersen, rng);
    Polynomial s = Polynomial::from_coeffs({rng.scalar(), rng.scalar()});
    sh = savss::savss_share(s, keys, rng);
  }
};

Request sample_put(const Fixture& f) {
  Request q;
  q.kind = Request::Kind::Put;
  q.key = "some/key";
  q.client = 7;
  q.reqseq = 42;
  q.commitment = f.sh.commitment;
  return q;
}

Message roundtrip(const Message& m) {
  auto bytes = message_to_bytes(m);
  auto back = message_from_bytes(bytes);
  REQUIRE(back);
  CHECK(message_to_bytes(*back) == bytes);
  return *back;
}

}  // namespace

TEST_CASE("request encoding round-trips every kind") {
  Fixture f;
  Request put = sample_put(f);
  Request get{Request::Kind::Get, "k", 3, 9, {}, std::nullopt, {}};
  Request acl{Request::Kind::AclSet, "k", 3, 10, {}, std::nullopt, {4, 5}};
  Request plain = get;
  plain.kind = Request::Kind::Put;
  plain.plain_value = Fr::from_u64(1234);
  for (const Request& q : {put, get, acl, plain}) {
    auto b = q.to_bytes();
    avss::codec::Reader r{b};
    auto back = Request::from_bytes(r);
    REQUIRE(back);
    CHECK(r.done());
    CHECK(back->to_bytes() == b);
    CHECK(back->digest() == q.digest());
  }
  // Distinct requests hash apart.
  CHECK(!(put.digest() == get.digest()));
}

TEST_CASE("every message type survives the wire") {
  Fixture f;
  Request put = sample_put(f);
  Digest d = put.digest();

  roundtrip(ClientRequest{put});
  roundtrip(PutShare{"some/key", 7, 42, d, f.sh.shares[1]});
  roundtrip(PutAck{"some/key", 42, 2});
  GetReply gr{"some/key", 42, 1, false, f.sh.commitment, f.sh.shares[0],
              std::nullopt};
  roundtrip(gr);
  GetReply denied{"k", 1, 0, true, std::nullopt, std::nullopt, std::nullopt};
  roundtrip(denied);
  roundtrip(PrePrepare{3, 17, put});
  Prepare p{3, 17, d, 2, sha256({})};
  roundtrip(p);
  roundtrip(CommitMsg{3, 17, d, 1});
  roundtrip(RecoveryRequest{d, "some/key", 7, 2});
  Entropy rng(5);
  auto rs = savss::savss_recover_contrib(f.keys.params, f.sh.commitment,
                                         f.keys.dprf_sks[0], f.sh.shares[0],
                                         3, rng);
  roundtrip(RecoveryResponse{d, "some/key", 0, rs});
  roundtrip(CheckpointMsg{64, d, 3, sha256({})});
  ViewChange vc;
  vc.new_view = 2;
  vc.replica = 1;
  vc.stable_seq = 64;
  vc.stable_digest = d;
  vc.entries.push_back({PrePrepare{1, 65, put}, true, {p, p}});
  roundtrip(vc);
  NewView nv;
  nv.view = 2;
  nv.proof = {vc, vc, vc};
  nv.leader_log = {PrePrepare{2, 65, put}};
  roundtrip(nv);
  roundtrip(StateTransferRequest{64, 3});
  StateTransferResponse str;
  str.stable_seq = 64;
  str.checkpoint_proof = {CheckpointMsg{64, d, 0, sha256({})}};
  str.snapshot = {1, 2, 3, 4};
  str.responder = 0;
  roundtrip(str);
}

TEST_CASE("malformed message bytes are rejected, never crash") {
  Fixture f;
  auto bytes = message_to_bytes(Message{PrePrepare{3, 17, sample_put(f)}});
  // Every truncation either parses to the same bytes or fails cleanly.
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    auto m = message_from_bytes(std::span(bytes.data(), len));
    CHECK(!m);
  }
  // Unknown tag byte.
  auto bad = bytes;
  bad[0] = 0xee;
  CHECK(!message_from_bytes(bad));
}

TEST_CASE("envelopes authenticate their sender") {
  Fixture f;
  Signer signer(12345);
  Envelope env{2, PutAck{"k", 1, 2}};
  auto payload = env.payload_bytes();
  Digest sig = signer.sign(2, payload);
  auto bytes = env.to_bytes(sig);

  auto back = Envelope::from_bytes(bytes);
  REQUIRE(back);
  CHECK(back->first.sender == 2);
  CHECK(signer.verify(2, back->first.payload_bytes(), back->second));
  // Wrong claimed sender or flipped payload byte fails verification.
  CHECK(!signer.verify(3, back->first.payload_bytes(), back->second));
  auto tampered = bytes;
  tampered[9] ^= 1;
  auto back2 = Envelope::from_bytes(tampered);
  if (back2)
    CHECK(!signer.verify(back2->first.sender, back2->first.payload_bytes(),
                         back2->second));
  // A different master seed is a different key universe.
  Signer other(54321);
  CHECK(!other.verify(2, payload, sig));
}
