#include <gtest/gtest.h>

#include <set>

#include "medexchain/digest.hpp"
#include "medexchain/group.hpp"

namespace medexchain::group {
namespace {

class SmallGroupTest : public ::testing::Test {
 protected:
  GroupPtr grp = Group::create(GroupProfile::transparent_small(101));
  G1 g_pow(long k) const { return grp->g1_from_exponent(k); }
  GT gt_pow(long k) const { return grp->gt_from_exponent(k); }
};

TEST_F(SmallGroupTest, PairOfIdentityIsIdentity) {
  EXPECT_TRUE(grp->pair(grp->g1_identity(), g_pow(17)).is_identity());
}

TEST_F(SmallGroupTest, PairMultipliesExponents) {
  // 3 * 5 mod 101
  EXPECT_EQ(grp->exponent_of(grp->pair(g_pow(3), g_pow(5))), 15);
  EXPECT_EQ(grp->pair(g_pow(2), g_pow(3)), grp->pow(grp->pair(g_pow(1), g_pow(1)), grp->scalar(6)));
}

TEST_F(SmallGroupTest, BilinearityExhaustiveSmallRange) {
  const GT base = grp->pair(grp->generator(), grp->generator());
  for (long a = 0; a <= 20; ++a) {
    for (long b = 0; b <= 20; ++b) {
      EXPECT_EQ(grp->pair(g_pow(a), g_pow(b)), grp->pow(base, grp->scalar(a * b)))
          << "a=" << a << " b=" << b;
    }
  }
}

TEST_F(SmallGroupTest, G1ExponentiationOracle) {
  EXPECT_EQ(grp->pow(grp->generator(), grp->scalar(1)), grp->generator());
  // 7 * 13 mod 101
  EXPECT_EQ(grp->exponent_of(grp->pow(g_pow(7), grp->scalar(13))), 91);
  auto x = g_pow(42);
  EXPECT_TRUE((x * x.inverse()).is_identity());
}

TEST_F(SmallGroupTest, GTExponentiationOracle) {
  EXPECT_TRUE(grp->pow(gt_pow(9), grp->scalar(0)).is_identity());
  // 4 * 30 = 120 = 19 mod 101
  EXPECT_EQ(grp->exponent_of(grp->pow(gt_pow(4), grp->scalar(30))), 19);
  auto x = gt_pow(33);
  EXPECT_EQ(grp->pow(x, grp->scalar(2)) * grp->pow(x, grp->scalar(3)), grp->pow(x, grp->scalar(5)));
}

TEST_F(SmallGroupTest, CountersTrackPrimitiveCalls) {
  grp->counters_reset();
  (void)grp->pair(g_pow(2), g_pow(3));
  EXPECT_EQ(grp->counters_snapshot(), (OpCounters{0, 0, 1, 0}));

  grp->counters_reset();
  for (int i = 0; i < 3; ++i) (void)grp->pow(g_pow(2), grp->scalar(5));
  EXPECT_EQ(grp->counters_snapshot(), (OpCounters{3, 0, 0, 0}));

  grp->counters_reset();
  (void)(g_pow(2) * g_pow(3));
  (void)(gt_pow(2) / gt_pow(3));
  (void)g_pow(4).inverse();
  EXPECT_EQ(grp->counters_snapshot(), OpCounters{});

  (void)grp->hash_to_g1(as_bytes("x"));
  (void)grp->hash_gt_to_g1(gt_pow(3));
  (void)grp->pow(gt_pow(2), grp->scalar(2));
  EXPECT_EQ(grp->counters_snapshot(), (OpCounters{0, 1, 0, 2}));
}

TEST_F(SmallGroupTest, SmallProfileSerializesScaledDown) {
  EXPECT_EQ(grp->serialize(g_pow(7)).size(), 2u);
  EXPECT_EQ(grp->serialize(gt_pow(7)).size(), 2u);
  EXPECT_EQ(grp->serialize(grp->scalar(7)).size(), 1u);
  EXPECT_EQ(grp->deserialize_g1(grp->serialize(g_pow(99))), g_pow(99));
  EXPECT_THROW(grp->deserialize_g1(Bytes{101, 0}), Error);
  EXPECT_THROW(grp->deserialize_scalar(Bytes{200}), Error);
}

TEST(GroupTest, MixingGroupsIsProfileMismatch) {
  auto a = Group::create(GroupProfile::transparent_small(101));
  auto b = Group::create(GroupProfile::transparent_small(101));
  try {
    (void)a->pair(a->generator(), b->generator());
    FAIL() << "expected profile mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::profile_mismatch);
  }
  EXPECT_THROW((void)(a->generator() * b->generator()), Error);
}

TEST(GroupTest, TransparentDefaultUsesReferenceWidths) {
  auto grp = Group::create(GroupProfile::transparent_80());
  SeededRandom rng(3);
  EXPECT_EQ(grp->serialize(grp->random_g1(rng)).size(), 128u);
  EXPECT_EQ(grp->serialize(grp->random_gt(rng)).size(), 128u);
  EXPECT_EQ(grp->serialize(grp->random_scalar(rng)).size(), 20u);
}

TEST(GroupTest, HashIsDeterministicAndSpreads) {
  auto grp = Group::create(GroupProfile::transparent_80());
  EXPECT_EQ(grp->hash_to_g1(as_bytes("alice")), grp->hash_to_g1(as_bytes("alice")));
  EXPECT_NE(grp->hash_to_g1(as_bytes("alice")), grp->hash_to_g1(as_bytes("bob")));
  SeededRandom rng(5);
  auto x = grp->random_gt(rng);
  EXPECT_EQ(grp->hash_gt_to_g1(x), grp->hash_gt_to_g1(grp->deserialize_gt(grp->serialize(x))));
  EXPECT_NE(grp->hash_gt_to_g1(x), grp->hash_gt_to_g1(x * grp->gt_generator()));
}

TEST(GroupTest, DescriptorRoundTrip) {
  auto grp = Group::create(GroupProfile::type_a_80());
  auto text = to_descriptor(grp->profile());
  auto parsed = parse_descriptor(text);
  EXPECT_EQ(parsed.order, grp->order());
  EXPECT_EQ(parsed.field_prime, grp->profile().field_prime);
  ASSERT_TRUE(parsed.generator.has_value());
  auto again = Group::create(parsed);
  EXPECT_EQ(again->serialize(again->generator()), grp->serialize(grp->generator()));
  EXPECT_THROW(parse_descriptor("q=zz\n"), Error);
  EXPECT_THROW(parse_descriptor("backend=pairing\nq=65\n"), Error);
}

// ---- pairing backend ----

class PairingGroupTest : public ::testing::Test {
 protected:
  static GroupPtr grp;
  static void SetUpTestSuite() { grp = Group::create(GroupProfile::type_a_80()); }
  SeededRandom rng{11};
};
GroupPtr PairingGroupTest::grp;

TEST_F(PairingGroupTest, GeneratorHasOrderQ) {
  const auto& g = grp->generator();
  EXPECT_FALSE(g.is_identity());
  EXPECT_TRUE(grp->on_curve(g));
  EXPECT_TRUE(grp->in_subgroup(g));
  EXPECT_TRUE(grp->g1_from_exponent(grp->order()).is_identity());
}

TEST_F(PairingGroupTest, NonDegenerate) {
  EXPECT_FALSE(grp->pair(grp->generator(), grp->generator()).is_identity());
  EXPECT_TRUE(grp->in_subgroup(grp->gt_generator()));
}

TEST_F(PairingGroupTest, BilinearityOnRandomExponents) {
  const GT base = grp->gt_generator();
  for (int i = 0; i < 8; ++i) {
    auto a = grp->random_scalar(rng);
    auto b = grp->random_scalar(rng);
    auto lhs = grp->pair(grp->pow(grp->generator(), a), grp->pow(grp->generator(), b));
    EXPECT_EQ(lhs, grp->pow(base, a * b));
  }
  EXPECT_EQ(grp->pair(grp->g1_from_exponent(2), grp->g1_from_exponent(3)),
            grp->pow(base, grp->scalar(6)));
}

TEST_F(PairingGroupTest, PairingIsSymmetric) {
  auto p = grp->random_g1(rng);
  auto q = grp->random_g1(rng);
  EXPECT_EQ(grp->pair(p, q), grp->pair(q, p));
  EXPECT_EQ(grp->pair(p * q, p), grp->pair(p, p) * grp->pair(q, p));
}

TEST_F(PairingGroupTest, HashOutputIsInSubgroup) {
  for (const char* id : {"alice", "bob", "carol", ""}) {
    auto h = grp->hash_to_g1(as_bytes(id));
    EXPECT_TRUE(grp->on_curve(h)) << id;
    EXPECT_TRUE(grp->in_subgroup(h)) << id;
  }
  auto h2 = grp->hash_gt_to_g1(grp->random_gt(rng));
  EXPECT_TRUE(grp->in_subgroup(h2));
}

TEST_F(PairingGroupTest, EncodingWidthsAndValidation) {
  auto x = grp->random_g1(rng);
  auto enc = grp->serialize(x);
  ASSERT_EQ(enc.size(), 128u);
  EXPECT_EQ(grp->deserialize_g1(enc), x);
  EXPECT_EQ(grp->serialize(grp->random_gt(rng)).size(), 128u);
  EXPECT_EQ(grp->serialize(grp->random_scalar(rng)).size(), 20u);
  EXPECT_TRUE(grp->deserialize_g1(grp->serialize(grp->g1_identity())).is_identity());

  try {
    (void)grp->deserialize_g1(ByteView(enc).first(127));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_encoding);
  }
  enc[127] ^= 1;
  try {
    (void)grp->deserialize_g1(enc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_element);
  }
  auto gt = grp->serialize(grp->random_gt(rng));
  gt[10] ^= 0x40;
  EXPECT_THROW(grp->deserialize_gt(gt), Error);
}

TEST_F(PairingGroupTest, ExponentsAreNotObservable) {
  try {
    (void)grp->exponent_of(grp->generator());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported);
  }
}

TEST_F(PairingGroupTest, GtExponentLaws) {
  auto x = grp->random_gt(rng);
  EXPECT_TRUE(grp->pow(x, grp->scalar(0)).is_identity());
  EXPECT_EQ(grp->pow(x, grp->scalar(2)) * grp->pow(x, grp->scalar(3)), grp->pow(x, grp->scalar(5)));
  EXPECT_TRUE((x * x.inverse()).is_identity());
}

}  // namespace
}  // namespace medexchain::group
