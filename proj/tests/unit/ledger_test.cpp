#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "medexchain/codec.hpp"
#include "medexchain/digest.hpp"
#include "medexchain/ledger.hpp"

namespace medexchain::ledger {
namespace {

using group::Group;
using group::GroupProfile;
using group::GroupPtr;
using scheme::ChainTag;

class LedgerTest : public ::testing::Test {
 protected:
  GroupPtr grp = Group::create(GroupProfile::transparent_80());
  SeededRandom rng{21};
  std::int64_t now = 1'000;
  Clock clock = [this] { return now; };
  ContentStore store;
  Relay relay{grp, store, clock};

  scheme::Scalar hospital_a = grp->random_nonzero_scalar(rng);
  scheme::Scalar crf_a = grp->random_nonzero_scalar(rng);
  scheme::Scalar hospital_b = grp->random_nonzero_scalar(rng);
  scheme::Scalar crf_b = grp->random_nonzero_scalar(rng);
  scheme::ChainParams chain_a = scheme::setup_chain(grp, hospital_a, crf_a, ChainTag::A);
  scheme::ChainParams chain_b = scheme::setup_chain(grp, hospital_b, crf_b, ChainTag::B);
  scheme::OwnerKeys owner = scheme::provision_owner(*grp, as_bytes("alice"), hospital_a, crf_a);
  scheme::UserKeys user = scheme::keygen_du(*grp, as_bytes("bob"), hospital_b, crf_b,
                                            grp->random_nonzero_scalar(rng), chain_b.system_public_key);

  std::unique_ptr<ChainNode> make_node(std::size_t max_access = kDefaultMaxAccessCount) {
    auto node = std::make_unique<ChainNode>(ChainTag::A, grp, store, max_access, clock);
    if (!relay.is_registered(ChainTag::A)) {
      node->record_registration(relay.register_chain(ChainTag::A, sha256(scheme::encode_file(chain_a))));
    } else {
      node->record_registration(RegistrationReceipt{ChainTag::A, Digest{}, 0, now});
    }
    return node;
  }

  struct Stored {
    scheme::GT m;
    scheme::SanitizedCiphertext ct;
    scheme::Scalar beta;
  };

  Stored make_ciphertext() {
    Stored s{grp->random_gt(rng), {}, grp->random_nonzero_scalar(rng)};
    auto ct = scheme::sample_enc(s.m, chain_a, owner.pk_do, rng);
    s.ct = scheme::crf_enc(ct, owner.pk_do, chain_a, s.beta);
    return s;
  }
};

TEST(ContentStoreTest, AddressIsDigestAndRoundTrips) {
  ContentStore store;
  auto data = to_bytes("patient health record");
  auto addr = store.put(data);
  EXPECT_EQ(addr, sha256(data));
  EXPECT_EQ(store.get(addr), data);
  EXPECT_EQ(store.put(data), addr);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_NE(store.put(to_bytes("other")), addr);
  EXPECT_FALSE(store.get(Digest{}).has_value());
}

TEST(ContentStoreTest, DirectoryBackedStoreReloadsAndDetectsTamper) {
  auto dir = std::filesystem::temp_directory_path() / "medexchain_store_test";
  std::filesystem::remove_all(dir);
  Address addr;
  {
    ContentStore store(dir);
    addr = store.put(to_bytes("blob"));
  }
  {
    ContentStore reopened(dir);
    EXPECT_EQ(reopened.get(addr), to_bytes("blob"));
  }
  {
    std::ofstream(dir / to_hex(addr), std::ios::binary) << "tampered";
  }
  EXPECT_THROW(ContentStore{dir}, Error);
  std::filesystem::remove_all(dir);
}

TEST_F(LedgerTest, RegistrationRules) {
  relay.register_chain(ChainTag::A, Digest{});
  relay.register_chain(ChainTag::B, Digest{});
  EXPECT_TRUE(relay.is_registered(ChainTag::A));
  EXPECT_TRUE(relay.is_registered(ChainTag::B));
  try {
    relay.register_chain(ChainTag::A, Digest{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::duplicate_registration);
  }

  ContentStore other;
  Relay fresh(grp, other, clock);
  auto s = make_ciphertext();
  auto rk = scheme::crf_rekeygen(scheme::sample_rekeygen(owner.sk_do_sanitized, user.pk, rng),
                                 owner.pk_do, user.pk, s.beta);
  try {
    fresh.reencrypt(ChainTag::A, "bob", s.ct, rk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unregistered_chain);
  }

  ChainNode unregistered(ChainTag::A, grp, store, 100, clock);
  EXPECT_THROW(unregistered.store_ciphertext(s.ct), Error);
}

TEST_F(LedgerTest, StoreCiphertextIndexesByDigest) {
  auto node = make_node();
  auto s = make_ciphertext();
  auto before = node->tx_log().size();
  auto receipt = node->store_ciphertext(s.ct);
  EXPECT_EQ(node->tx_log().size(), before + 1);
  EXPECT_EQ(receipt.data1, sha256(scheme::encode_wire(s.ct)));
  EXPECT_EQ(receipt.add1, receipt.data1);
  EXPECT_EQ(store.get(receipt.add1), scheme::encode_wire(s.ct));
  EXPECT_EQ(node->store_ciphertext(s.ct).data1, receipt.data1);

  auto log = node->tx_log();
  for (std::size_t i = 1; i < log.size(); ++i) EXPECT_LT(log[i - 1].height, log[i].height);
}

TEST_F(LedgerTest, ContractFetchFollowsAccessRules) {
  auto node = make_node(2);
  auto s = make_ciphertext();
  auto receipt = node->store_ciphertext(s.ct, as_bytes("phr"));

  auto missing = node->contract_fetch(Digest{}, "bob", now);
  ASSERT_FALSE(missing.ok());
  EXPECT_EQ(message(*missing.refusal), "Target data doesn’t exist");
  EXPECT_TRUE(node->access_list().empty());

  auto first = node->contract_fetch(receipt.data1, "bob", now);
  ASSERT_TRUE(first.ok());
  EXPECT_EQ(scheme::encode_wire(first.grant->ciphertext), scheme::encode_wire(s.ct));
  EXPECT_EQ(first.grant->payload, to_bytes("phr"));
  ASSERT_EQ(node->access_list().size(), 1u);
  EXPECT_EQ(node->access_list()[0].requester, "bob");
  EXPECT_EQ(node->access_list()[0].id, receipt.data1);

  EXPECT_TRUE(node->contract_fetch(receipt.data1, "bob", now).ok());
  auto third = node->contract_fetch(receipt.data1, "bob", now);
  ASSERT_FALSE(third.ok());
  EXPECT_EQ(message(*third.refusal), "Access limit reached!");
  // The count is per requester across every ciphertext on the node.
  auto other = node->store_ciphertext(make_ciphertext().ct);
  EXPECT_EQ(node->contract_fetch(other.data1, "bob", now).refusal, Refusal::access_limit);
  // The limit is checked before existence.
  EXPECT_EQ(node->contract_fetch(Digest{}, "bob", now).refusal, Refusal::access_limit);
  EXPECT_TRUE(node->contract_fetch(other.data1, "carol", now).ok());
  EXPECT_EQ(node->access_list().size(), 3u);
  EXPECT_EQ(node->audit().query({.kind = "contract", .outcome = "refused"}).size(), 4u);
}

TEST_F(LedgerTest, ConcurrentRequestsNeverExceedTheLimit) {
  constexpr std::size_t kLimit = 10;
  constexpr int kRequests = 100;
  auto node = make_node(kLimit);
  auto s = make_ciphertext();
  auto receipt = node->store_ciphertext(s.ct);
  const std::vector<std::string> users = {"u0", "u1", "u2", "u3", "u4"};

  std::atomic<int> next{0};
  std::mutex tally_mu;
  std::map<std::string, int> granted, limited, missing;
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&] {
      for (int i = next++; i < kRequests; i = next++) {
        const auto& who = users[i % users.size()];
        bool unknown = i % 7 == 0;
        auto r = node->contract_fetch(unknown ? Digest{} : receipt.data1, who, i);
        std::lock_guard lock(tally_mu);
        if (r.ok()) ++granted[who];
        else if (*r.refusal == Refusal::access_limit) ++limited[who];
        else ++missing[who];
      }
    });
  }
  for (auto& w : workers) w.join();

  std::size_t total_granted = 0;
  for (const auto& who : users) {
    EXPECT_EQ(granted[who], static_cast<int>(kLimit)) << who;
    EXPECT_EQ(node->access_count(who), kLimit);
    total_granted += granted[who];
    EXPECT_EQ(granted[who] + limited[who] + missing[who], kRequests / static_cast<int>(users.size()));
  }
  EXPECT_EQ(node->access_list().size(), total_granted);
}

TEST_F(LedgerTest, RelayReencryptsStoresAndAudits) {
  relay.register_chain(ChainTag::A, Digest{});
  auto s = make_ciphertext();
  auto rk = scheme::sample_rekeygen(owner.sk_do_sanitized, user.pk, rng);
  auto rkp = scheme::crf_rekeygen(rk, owner.pk_do, user.pk, s.beta);

  auto before = grp->counters_snapshot();
  auto data2 = relay.reencrypt(ChainTag::A, "bob", s.ct, rkp, as_bytes("dem"));
  EXPECT_EQ(grp->counters_snapshot() - before, (group::OpCounters{0, 0, 1, 0}));

  auto record = relay.fetch(data2, "bob");
  EXPECT_EQ(data2, sha256(scheme::encode_wire(record.ciphertext)));
  EXPECT_EQ(scheme::dec(record.ciphertext, user.sk_du), s.m);
  EXPECT_EQ(record.payload, to_bytes("dem"));
  auto again = relay.fetch(data2, "bob");
  EXPECT_EQ(scheme::encode_wire(again.ciphertext), scheme::encode_wire(record.ciphertext));

  try {
    relay.fetch(Digest{}, "bob");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_found);
  }
}

TEST_F(LedgerTest, AuditQueriesFilterAndExport) {
  relay.register_chain(ChainTag::A, Digest{});
  for (int i = 0; i < 3; ++i) {
    auto s = make_ciphertext();
    auto rkp = scheme::crf_rekeygen(scheme::sample_rekeygen(owner.sk_do_sanitized, user.pk, rng),
                                    owner.pk_do, user.pk, s.beta);
    ++now;
    relay.reencrypt(ChainTag::A, i == 2 ? "carol" : "bob", s.ct, rkp);
  }
  relay.record_refusal("bob", Digest{});

  EXPECT_EQ(relay.audit_query({.kind = "share", .outcome = "ok"}).size(), 3u);
  auto refused = relay.audit_query({.outcome = "refused"});
  ASSERT_EQ(refused.size(), 1u);
  EXPECT_EQ(refused[0].party, "bob");
  for (const auto& e : relay.audit_query({.party = "bob"})) EXPECT_EQ(e.party, "bob");
  EXPECT_EQ(relay.audit_query({.party = "bob"}).size(), 3u);

  auto all = relay.audit_query();
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1].seq, all[i].seq);

  std::stringstream jsonl;
  relay.audit().write_jsonl(jsonl);
  std::string first_line;
  std::getline(std::stringstream(jsonl.str()), first_line);
  EXPECT_EQ(first_line.rfind("{\"seq\":1,\"kind\":\"register\",\"party\":\"chain-A\",\"timestamp_ms\":1000,"
                             "\"outcome\":\"ok\",\"id_hex\":\"",
                             0),
            0u);
  AuditLog reloaded;
  reloaded.load_jsonl(jsonl);
  ASSERT_EQ(reloaded.size(), all.size());
  EXPECT_EQ(reloaded.query().back().seq, all.back().seq);
  EXPECT_EQ(reloaded.query().back().outcome, "refused");
}

TEST_F(LedgerTest, StateSnapshotsRoundTrip) {
  auto node = make_node(5);
  auto s = make_ciphertext();
  auto receipt = node->store_ciphertext(s.ct, as_bytes("x"));
  ASSERT_TRUE(node->contract_fetch(receipt.data1, "bob", 42).ok());

  auto path = std::filesystem::temp_directory_path() / "medexchain_node_state.json";
  node->save_state(path);
  ChainNode restored(ChainTag::A, grp, store, 5, clock);
  restored.load_state(path);
  EXPECT_TRUE(restored.registered());
  EXPECT_EQ(restored.access_count("bob"), 1u);
  EXPECT_EQ(restored.tx_log().size(), node->tx_log().size());
  ASSERT_TRUE(restored.lookup(receipt.data1).has_value());
  EXPECT_EQ(restored.lookup(receipt.data1)->payload, receipt.payload);

  ChainNode wrong(ChainTag::B, grp, store, 5, clock);
  EXPECT_THROW(wrong.load_state(path), Error);
  std::filesystem::remove(path);

  auto rk = scheme::crf_rekeygen(scheme::sample_rekeygen(owner.sk_do_sanitized, user.pk, rng),
                                 owner.pk_do, user.pk, s.beta);
  auto data2 = relay.reencrypt(ChainTag::A, "bob", s.ct, rk, as_bytes("dem"));
  auto relay_path = std::filesystem::temp_directory_path() / "medexchain_relay_state.json";
  relay.save_state(relay_path);
  Relay restored_relay(grp, store, clock);
  restored_relay.load_state(relay_path);
  EXPECT_TRUE(restored_relay.is_registered(ChainTag::A));
  EXPECT_EQ(restored_relay.fetch(data2, "bob").payload, to_bytes("dem"));
  std::filesystem::remove(relay_path);
}

}  // namespace
}  // namespace medexchain::ledger
