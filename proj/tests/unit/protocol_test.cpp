#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "medexchain/codec.hpp"
#include "medexchain/world.hpp"

namespace medexchain::protocol {
namespace {

using group::GroupProfile;

static_assert(!PublicField<scheme::Scalar>);
static_assert(!PublicField<scheme::OwnerKeys>);
static_assert(!PublicField<scheme::UserKeys>);
static_assert(!PublicField<scheme::MasterSecrets>);
static_assert(PublicField<scheme::SanitizedReKey>);

bool contains(ByteView haystack, ByteView needle) {
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::vector<MessageKind> all_kinds() {
  return {MessageKind::M1, MessageKind::M2, MessageKind::M3, MessageKind::M4,
          MessageKind::M5, MessageKind::M6, MessageKind::M7, MessageKind::M8};
}

class ProtocolTest : public ::testing::Test {
 protected:
  SeededRandom rng{99};
  std::int64_t now = 1'700'000'000'000;
  WorldConfig config() {
    WorldConfig c;
    c.clock = [this] { return now; };
    return c;
  }
};

// A world plus one session's actors, delivering by hand.
struct Session {
  World& world;
  Peers peers;
  DataUserActor du;
  DataOwnerActor owner;
  HospitalActor hospital;
  RelayActor relay;
  std::vector<Bytes> wires;

  Session(World& w, const std::string& owner_id, const std::string& user_id)
      : world(w),
        peers(w.peers(owner_id, user_id)),
        du(w.user(user_id), w.chain_a(), w.owner(owner_id).pk_do, peers, w.context_for(ActorRole::DU, user_id)),
        owner(w.owner(owner_id), w.chain_a(), peers, w.context_for(ActorRole::DO, owner_id)),
        hospital(w.node_a(), w.relay(), w.group(), peers, w.context_for(ActorRole::HospitalA, "hospital-a")),
        relay(w.relay(), w.group(), peers, w.context_for(ActorRole::Relay, "relay")) {}

  Step deliver(Actor& to, const Bytes& wire) {
    wires.push_back(wire);
    return to.receive(wire);
  }
};

TEST(EnvelopeTest, WireLayoutAndRoundTrip) {
  Envelope env;
  env.kind = MessageKind::M4;
  env.sender = make_actor_id(ActorRole::Relay, "relay");
  env.recipient = make_actor_id(ActorRole::HospitalA, "hospital-a");
  env.timestamp_ms = 0x0102030405060708;
  env.nonce.fill(0xAB);
  env.fields = {to_bytes("respond_1"), Bytes(32, 0x11)};
  auto wire = encode_envelope(env);
  ASSERT_EQ(wire.size(), 1u + 8 + 8 + 8 + 16 + (4 + 9) + (4 + 32));
  EXPECT_EQ(wire[0], 4);
  EXPECT_TRUE(std::equal(env.sender.begin(), env.sender.end(), wire.begin() + 1));
  EXPECT_EQ(wire[17], 0x01);
  EXPECT_EQ(wire[24], 0x08);
  EXPECT_EQ(wire[25], 0xAB);
  EXPECT_EQ(wire[41], 0);
  EXPECT_EQ(wire[44], 9);

  auto back = decode_envelope(wire);
  EXPECT_EQ(back.kind, env.kind);
  EXPECT_EQ(back.sender, env.sender);
  EXPECT_EQ(back.recipient, env.recipient);
  EXPECT_EQ(back.timestamp_ms, env.timestamp_ms);
  EXPECT_EQ(back.nonce, env.nonce);
  EXPECT_EQ(back.fields, env.fields);

  auto bad_kind = wire;
  bad_kind[0] = 9;
  EXPECT_THROW(decode_envelope(bad_kind), Error);
  auto trailing = wire;
  trailing.push_back(0);
  EXPECT_THROW(decode_envelope(trailing), Error);
  EXPECT_THROW(decode_envelope(ByteView(wire).first(wire.size() - 1)), Error);
  env.fields.pop_back();
  EXPECT_THROW(encode_envelope(env), Error);
}

TEST(EnvelopeTest, SchemasCarryNoSecrets) {
  EXPECT_TRUE(schemas_are_public());
  for (auto kind : all_kinds()) {
    auto fields = schema(kind);
    ASSERT_FALSE(fields.empty());
    if (kind != MessageKind::M1) EXPECT_EQ(fields[0].tag, FieldTag::label);
    for (const auto& f : fields) EXPECT_FALSE(is_secret(f.cls)) << to_string(kind) << " " << f.name;
  }
  for (const auto& f : sealed_request_schema()) EXPECT_FALSE(is_secret(f.cls)) << f.name;
  EXPECT_EQ(role_tag(MessageKind::M1), "request_1");
  EXPECT_EQ(role_tag(MessageKind::M8), "respond_4");
}

TEST(FreshnessTest, SkewReplayAndExpiry) {
  std::int64_t now = 1'000'000;
  FreshnessPolicy policy(1'000, [&] { return now; });
  Nonce n{};
  n[0] = 1;
  EXPECT_EQ(policy.check(MessageKind::M1, now - 1'001, n), Rejection::stale_timestamp);
  EXPECT_EQ(policy.check(MessageKind::M1, now + 1'001, n), Rejection::stale_timestamp);
  EXPECT_FALSE(policy.accept(MessageKind::M1, now - 1'000, n));
  EXPECT_EQ(policy.accept(MessageKind::M1, now, n), Rejection::replayed_nonce);
  EXPECT_FALSE(policy.accept(MessageKind::M2, now, n));
  EXPECT_EQ(policy.cached(), 2u);
  now += 2'000;
  EXPECT_FALSE(policy.accept(MessageKind::M3, now, n));
  EXPECT_EQ(policy.cached(), 1u);
}

TEST(TransportTest, LatencyAndDrops) {
  Transport instant;
  EXPECT_EQ(instant.send(to_bytes("x")), to_bytes("x"));
  Transport lossy(TransportConfig{0, 1.0});
  EXPECT_FALSE(lossy.send(to_bytes("x")).has_value());
  EXPECT_EQ(lossy.dropped(), 1u);
  Transport slow(TransportConfig{5, 0.0});
  auto start = std::chrono::steady_clock::now();
  slow.send(to_bytes("x"));
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(5));
  EXPECT_THROW(Transport(TransportConfig{0, 1.5}), Error);
}

TEST_F(ProtocolTest, HappyPathRecoversMessageAndPayload) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto phr = to_bytes("blood pressure 120/80");
  auto up = world.upload("alice", phr);

  auto out = world.orchestrate_share("alice", "bob", up.data1);
  ASSERT_TRUE(out.ok()) << out.reason;
  EXPECT_EQ(out.verified, all_kinds());
  ASSERT_TRUE(out.plaintext.has_value());
  EXPECT_EQ(out.plaintext->group_payload, up.message);
  EXPECT_EQ(out.plaintext->dem_payload, phr);
  ASSERT_TRUE(out.data2.has_value());
  EXPECT_EQ(world.relay().audit_query({.kind = "share", .party = "bob"}).size(), 1u);
  EXPECT_EQ(world.node_a().access_count("bob"), 1u);
}

TEST_F(ProtocolTest, SplitShareThenFetch) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("x-ray"));
  auto shared = world.share("alice", "bob", up.data1);
  ASSERT_TRUE(shared.ok()) << shared.reason;
  EXPECT_EQ(shared.verified.size(), 6u);
  ASSERT_TRUE(shared.data2.has_value());
  EXPECT_FALSE(shared.plaintext.has_value());

  auto fetched = world.fetch("alice", "bob", *shared.data2);
  ASSERT_TRUE(fetched.ok()) << fetched.reason;
  EXPECT_EQ(fetched.verified, (std::vector{MessageKind::M7, MessageKind::M8}));
  EXPECT_EQ(fetched.plaintext->dem_payload, to_bytes("x-ray"));

  auto missing = world.fetch("alice", "bob", Digest{});
  EXPECT_EQ(missing.kind, OutcomeKind::refusal);
  EXPECT_NE(missing.reason.find("unknown-identifier"), std::string::npos);
}

TEST_F(ProtocolTest, ReplayedEnvelopesAreRejected) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));

  Session s(world, "alice", "bob");
  auto m1 = s.du.request(up.data1);
  auto first = s.deliver(s.owner, m1);
  ASSERT_TRUE(first.accepted()) << first.detail;
  auto replay = s.deliver(s.owner, m1);
  EXPECT_EQ(replay.rejection, Rejection::replayed_nonce);

  // A fresh session for the same data owner shares its nonce cache.
  Session other(world, "alice", "bob");
  EXPECT_EQ(other.deliver(other.owner, m1).rejection, Rejection::replayed_nonce);
  EXPECT_EQ(other.owner.state(), DataOwnerActor::State::awaiting_request);

  // Replaying later messages of a finished run fails too.
  auto m2 = crf_filter_m2(world.crf_a(), world.group(), *first.reply);
  auto m3 = s.deliver(s.hospital, m2);
  ASSERT_TRUE(m3.accepted()) << m3.detail;
  Session third(world, "alice", "bob");
  EXPECT_EQ(third.deliver(third.hospital, m2).rejection, Rejection::replayed_nonce);
  EXPECT_EQ(world.node_a().access_count("bob"), 1u);
}

TEST_F(ProtocolTest, StaleTimestampsAreRejected) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  Session s(world, "alice", "bob");
  auto m1 = s.du.request(up.data1);
  now += kDefaultMaxSkewMs + 1;
  auto step = s.deliver(s.owner, m1);
  EXPECT_EQ(step.rejection, Rejection::stale_timestamp);
  EXPECT_EQ(s.owner.state(), DataOwnerActor::State::awaiting_request);
  EXPECT_TRUE(s.owner.consumed().empty());
}

TEST_F(ProtocolTest, OutOfOrderDeliveryNeverAdvancesState) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  Session s(world, "alice", "bob");

  // An M4 reaching Hospital_A before it has consumed M2/M3.
  Envelope early;
  early.kind = MessageKind::M4;
  early.sender = s.peers.relay;
  early.recipient = s.hospital.id();
  early.timestamp_ms = now;
  rng.fill(early.nonce);
  early.fields = {to_bytes("respond_1"), Bytes(32, 7)};
  auto early_wire = encode_envelope(early);
  EXPECT_EQ(s.deliver(s.hospital, early_wire).rejection, Rejection::wrong_state);
  EXPECT_EQ(s.hospital.state(), HospitalActor::State::awaiting_m2);
  EXPECT_TRUE(s.hospital.consumed().empty());

  // M5 to the data owner before M1, and M8 to an idle data user.
  auto m1 = s.du.request(up.data1);
  Envelope m5 = early;
  m5.kind = MessageKind::M5;
  m5.recipient = s.owner.id();
  m5.fields[0] = to_bytes("respond_2");
  EXPECT_EQ(s.deliver(s.owner, encode_envelope(m5)).rejection, Rejection::wrong_state);
  EXPECT_EQ(s.owner.state(), DataOwnerActor::State::awaiting_request);

  // The proper sequence still completes afterwards, and the early M4 was not
  // recorded as seen, so the rejection changed nothing.
  auto m2 = s.deliver(s.owner, m1);
  ASSERT_TRUE(m2.accepted());
  auto m3 = s.deliver(s.hospital, crf_filter_m2(world.crf_a(), world.group(), *m2.reply));
  ASSERT_TRUE(m3.accepted()) << m3.detail;
  auto m4 = s.deliver(s.relay, *m3.reply);
  ASSERT_TRUE(m4.accepted());
  EXPECT_EQ(s.deliver(s.relay, *m3.reply).rejection, Rejection::replayed_nonce);
  auto m5_real = s.deliver(s.hospital, *m4.reply);
  ASSERT_TRUE(m5_real.accepted());
  auto m6 = s.deliver(s.owner, *m5_real.reply);
  ASSERT_TRUE(m6.accepted());
  auto m7 = s.deliver(s.du, *m6.reply);
  ASSERT_TRUE(m7.accepted());
  EXPECT_EQ(s.deliver(s.du, *m6.reply).rejection, Rejection::replayed_nonce);
  auto m8 = s.deliver(s.relay, *m7.reply);
  ASSERT_TRUE(m8.accepted());
  ASSERT_TRUE(s.deliver(s.du, *m8.reply).accepted());
  EXPECT_EQ(s.du.plaintext()->group_payload, up.message);
  EXPECT_EQ(s.hospital.consumed(), (std::vector{MessageKind::M2, MessageKind::M4}));
}

TEST_F(ProtocolTest, NoSecretsOnTheWire) {
  World world(config(), rng);
  auto alice = world.provision_owner("alice");
  auto bob = world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  Session s(world, "alice", "bob");
  std::optional<Bytes> next = s.du.request(up.data1);
  std::vector<Actor*> route = {&s.owner, &s.hospital, &s.relay, &s.hospital, &s.owner, &s.du, &s.relay, &s.du};
  for (auto* actor : route) {
    ASSERT_TRUE(next.has_value());
    Bytes wire = *next;
    if (decode_envelope(wire).kind == MessageKind::M2) wire = crf_filter_m2(world.crf_a(), world.group(), wire);
    auto step = s.deliver(*actor, wire);
    ASSERT_TRUE(step.accepted()) << step.detail;
    next = step.reply;
  }
  const auto& grp = *world.group();
  std::vector<Bytes> secrets = {grp.serialize(alice.sk_do_raw), grp.serialize(alice.sk_do_sanitized),
                                grp.serialize(bob.sk_du), grp.serialize(bob.partial_raw),
                                grp.serialize(bob.partial_sanitized), grp.serialize(bob.user_secret)};
  for (const auto* m : {&world.secrets().chain_a, &world.secrets().chain_b}) {
    secrets.push_back(grp.serialize(m->hospital_master));
    secrets.push_back(grp.serialize(m->crf_master));
  }
  ASSERT_EQ(s.wires.size(), 8u);
  for (const auto& wire : s.wires) {
    for (const auto& secret : secrets) EXPECT_FALSE(contains(wire, secret));
  }
}

TEST_F(ProtocolTest, ForgedUserKeyFailsIdentityVerification) {
  World world(config(), rng);
  world.provision_owner("alice");
  auto bob = world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));

  auto forged = bob;
  forged.pk.pk2 = world.group()->pow(world.chain_b().system_public_key, world.group()->random_nonzero_scalar(rng));
  world.add_user(forged);
  auto out = world.orchestrate_share("alice", "bob", up.data1);
  EXPECT_EQ(out.kind, OutcomeKind::refusal);
  EXPECT_EQ(out.failed_at, MessageKind::M1);
  EXPECT_NE(out.reason.find("identity-verification"), std::string::npos);
  EXPECT_EQ(world.node_a().access_count("bob"), 0u);

  auto mallory = world.provision_user("mallory");
  mallory.identity = to_bytes("bob");
  world.add_user(mallory);
  auto impersonation = world.orchestrate_share("alice", "bob", up.data1);
  EXPECT_EQ(impersonation.kind, OutcomeKind::refusal);
  EXPECT_NE(impersonation.reason.find("identity-verification"), std::string::npos);
}

TEST_F(ProtocolTest, AccessLimitAndUnknownDataAreRefused) {
  auto cfg = config();
  cfg.max_access_count = 1;
  World world(cfg, rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  ASSERT_TRUE(world.orchestrate_share("alice", "bob", up.data1).ok());
  auto second = world.orchestrate_share("alice", "bob", up.data1);
  EXPECT_EQ(second.kind, OutcomeKind::refusal);
  EXPECT_EQ(second.reason, "Access limit reached!");
  EXPECT_EQ(second.failed_at, MessageKind::M2);
  EXPECT_EQ(world.relay().audit_query({.party = "bob", .outcome = "refused"}).size(), 1u);

  world.provision_user("carol");
  auto missing = world.orchestrate_share("alice", "carol", Digest{});
  EXPECT_EQ(missing.kind, OutcomeKind::refusal);
  EXPECT_EQ(missing.reason, "Target data doesn’t exist");
}

TEST_F(ProtocolTest, UnsanitizedRekeyIsRefusedByHospital) {
  World world(config(), rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  Session s(world, "alice", "bob");
  auto m2 = s.deliver(s.owner, s.du.request(up.data1));
  ASSERT_TRUE(m2.accepted());
  auto bypass = s.deliver(s.hospital, *m2.reply);
  EXPECT_EQ(bypass.rejection, Rejection::malformed_fields);
  EXPECT_NE(bypass.detail.find("reverse firewall"), std::string::npos);
}

TEST_F(ProtocolTest, DroppedMessagesTimeOut) {
  auto cfg = config();
  cfg.transport.drop_probability = 1.0;
  World world(cfg, rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  auto out = world.orchestrate_share("alice", "bob", up.data1);
  EXPECT_EQ(out.kind, OutcomeKind::timeout);
  EXPECT_EQ(out.failed_at, MessageKind::M1);
  EXPECT_TRUE(out.verified.empty());
}

TEST_F(ProtocolTest, LatencyAccumulatesOverEightHops) {
  auto cfg = config();
  cfg.transport.latency_ms = 5;
  World world(cfg, rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("ecg"));
  auto out = world.orchestrate_share("alice", "bob", up.data1);
  ASSERT_TRUE(out.ok()) << out.reason;
  EXPECT_GE(out.elapsed, std::chrono::milliseconds(8 * 5));
  EXPECT_EQ(world.transport().delivered(), 8u);
}

TEST_F(ProtocolTest, ConcurrentOrchestrationsAllSucceed) {
  World world(WorldConfig{}, rng);
  world.provision_owner("alice");
  std::vector<std::string> users;
  for (int i = 0; i < 4; ++i) {
    users.push_back("user" + std::to_string(i));
    world.provision_user(users.back());
  }
  std::vector<Upload> uploads;
  for (int i = 0; i < 10; ++i) uploads.push_back(world.upload("alice", to_bytes("record " + std::to_string(i))));

  std::atomic<int> next{0}, ok{0};
  constexpr int kRuns = 200;
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      for (int i = next++; i < kRuns; i = next++) {
        const auto& up = uploads[i % uploads.size()];
        auto out = world.orchestrate_share("alice", users[i % users.size()], up.data1);
        if (out.ok() && out.plaintext && out.plaintext->group_payload == up.message &&
            out.plaintext->dem_payload == std::optional<Bytes>(to_bytes("record " + std::to_string(i % uploads.size())))) {
          ++ok;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(ok.load(), kRuns);
  EXPECT_EQ(world.relay().audit_query({.kind = "share"}).size(), static_cast<std::size_t>(kRuns));
}

TEST_F(ProtocolTest, PairingBackendEndToEnd) {
  auto cfg = config();
  cfg.profile = GroupProfile::type_a_80();
  World world(cfg, rng);
  world.provision_owner("alice");
  world.provision_user("bob");
  auto up = world.upload("alice", to_bytes("pairing"));
  auto out = world.orchestrate_share("alice", "bob", up.data1);
  ASSERT_TRUE(out.ok()) << out.reason;
  EXPECT_EQ(out.plaintext->group_payload, up.message);
  EXPECT_EQ(out.plaintext->dem_payload, to_bytes("pairing"));
}

}  // namespace
}  // namespace medexchain::protocol
