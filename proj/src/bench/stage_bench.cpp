#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>

#include "medexchain/bench.hpp"
#include "medexchain/codec.hpp"

namespace medexchain::bench {

namespace {

using namespace scheme;
using Clock = std::chrono::steady_clock;

struct Sample {
  OpCounters counters;
  double micros = 0;
};

template <class F>
Sample measure(const group::Group& grp, F&& f) {
  auto before = grp.counters_snapshot();
  auto start = Clock::now();
  f();
  auto stop = Clock::now();
  return {grp.counters_snapshot() - before,
          std::chrono::duration<double, std::micro>(stop - start).count()};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Everything one repetition needs, generated outside the timed region.
struct Fixture {
  Scalar s, a, y, b, r, alpha, beta, lambda;
  ChainParams chain_a, chain_b;
  Bytes owner_id, user_id;
  OwnerKeys owner;
  UserKeys user;
  GT m, x;
  OriginalCiphertext ct;
  SanitizedCiphertext sct;
  ReKey rk;
  SanitizedReKey rkp;
  ReCiphertext rct;

  Fixture(const GroupPtr& grp, RandomSource& rng, std::size_t n)
      : s(grp->random_nonzero_scalar(rng)),
        a(grp->random_nonzero_scalar(rng)),
        y(grp->random_nonzero_scalar(rng)),
        b(grp->random_nonzero_scalar(rng)),
        r(grp->random_nonzero_scalar(rng)),
        alpha(grp->random_nonzero_scalar(rng)),
        beta(grp->random_nonzero_scalar(rng)),
        lambda(grp->random_nonzero_scalar(rng)),
        chain_a(setup_chain(grp, s, a, ChainTag::A)),
        chain_b(setup_chain(grp, y, b, ChainTag::B)),
        owner_id(to_bytes("owner-" + std::to_string(n))),
        user_id(to_bytes("user-" + std::to_string(n))),
        owner(provision_owner(*grp, owner_id, s, a)),
        user(keygen_du(*grp, user_id, y, b, r, chain_b.system_public_key)),
        m(grp->random_gt(rng)),
        x(grp->random_gt(rng)),
        ct(enc(m, chain_a, owner.pk_do, alpha)),
        sct(crf_enc(ct, owner.pk_do, chain_a, beta)),
        rk(rekeygen(owner.sk_do_sanitized, user.pk, lambda, x)),
        rkp(crf_rekeygen(rk, owner.pk_do, user.pk, beta)),
        rct(reenc(sct, rkp)) {}
};

std::function<void()> stage_call(Stage stage, const GroupPtr& grp, const Fixture& f) {
  switch (stage) {
    case Stage::keygen_do:
      return [&] { (void)provision_owner(*grp, f.owner_id, f.s, f.a); };
    case Stage::keygen_du:
      return [&] { (void)keygen_du(*grp, f.user_id, f.y, f.b, f.r, f.chain_b.system_public_key); };
    case Stage::enc:
      return [&] { (void)crf_enc(enc(f.m, f.chain_a, f.owner.pk_do, f.alpha), f.owner.pk_do, f.chain_a, f.beta); };
    case Stage::rekeygen:
      return [&] {
        (void)crf_rekeygen(rekeygen(f.owner.sk_do_sanitized, f.user.pk, f.lambda, f.x), f.owner.pk_do,
                           f.user.pk, f.beta);
      };
    case Stage::reenc:
      return [&] { (void)reenc(f.sct, f.rkp); };
    case Stage::dec:
      return [&] {
        if (dec(f.rct, f.user.sk_du) != f.m) throw Error(Errc::internal_consistency, "benchmark decryption mismatch");
      };
  }
  throw Error(Errc::invalid_argument, "unknown stage");
}

}  // namespace

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::keygen_do: return "KeyGen_DO";
    case Stage::keygen_du: return "KeyGen_DU";
    case Stage::enc: return "Enc";
    case Stage::rekeygen: return "ReKeyGen";
    case Stage::reenc: return "ReEnc";
    case Stage::dec: return "Dec";
  }
  return "?";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::keygen_do, Stage::keygen_du, Stage::enc,
                                            Stage::rekeygen,  Stage::reenc,     Stage::dec};
  return stages;
}

OpCounters expected_counters(Stage stage) {
  switch (stage) {
    case Stage::keygen_do: return {2, 0, 0, 1};
    case Stage::keygen_du: return {4, 0, 0, 2};
    case Stage::enc: return {3, 2, 2, 0};
    case Stage::rekeygen: return {3, 2, 2, 1};
    case Stage::reenc: return {0, 0, 1, 0};
    case Stage::dec: return {0, 0, 2, 1};
  }
  throw Error(Errc::invalid_argument, "unknown stage");
}

std::vector<StageReport> run_stage_bench(const StageBenchConfig& config, RandomSource& rng) {
  if (config.repetitions == 0) throw Error(Errc::invalid_argument, "repetitions must be at least 1");
  auto grp = group::Group::create(config.profile);

  std::vector<StageReport> reports;
  for (auto stage : all_stages()) {
    StageReport report;
    report.stage = to_string(stage);
    report.backend = group::to_string(grp->backend());
    report.repetitions = config.repetitions;
    report.counters_exact = true;
    std::vector<double> times;
    times.reserve(config.repetitions);
    std::optional<OpCounters> first;

    for (std::size_t i = 0; i < config.warmup + config.repetitions; ++i) {
      Fixture fixture(grp, rng, i);
      auto sample = measure(*grp, stage_call(stage, grp, fixture));
      if (i < config.warmup) continue;
      if (!first) first = sample.counters;
      if (sample.counters != *first || sample.counters != expected_counters(stage)) {
        report.counters_exact = false;
      }
      times.push_back(sample.micros);
    }
    report.counters = *first;
    report.mean_us = mean(times);
    report.median_us = median(times);
    reports.push_back(std::move(report));
  }
  return reports;
}

PrimitiveTimings run_primitive_bench(const GroupProfile& profile, std::size_t repetitions,
                                     std::size_t warmup, RandomSource& rng) {
  if (repetitions == 0) throw Error(Errc::invalid_argument, "repetitions must be at least 1");
  auto grp = group::Group::create(profile);
  std::vector<double> pairing, hash, e1, e2;
  for (std::size_t i = 0; i < warmup + repetitions; ++i) {
    auto p = grp->random_g1(rng), q = grp->random_g1(rng);
    auto t = grp->random_gt(rng);
    auto k = grp->random_nonzero_scalar(rng);
    auto sp = measure(*grp, [&] { (void)grp->pair(p, q); });
    auto sh = measure(*grp, [&] { (void)grp->hash_gt_to_g1(t); });
    auto s1 = measure(*grp, [&] { (void)grp->pow(p, k); });
    auto s2 = measure(*grp, [&] { (void)grp->pow(t, k); });
    if (i < warmup) continue;
    pairing.push_back(sp.micros);
    hash.push_back(sh.micros);
    e1.push_back(s1.micros);
    e2.push_back(s2.micros);
  }
  return {median(pairing), median(hash), median(e1), median(e2), group::to_string(grp->backend())};
}

std::vector<RatioCheck> run_ratio_checks(const GroupProfile& profile, std::size_t repetitions,
                                         std::size_t warmup, RandomSource& rng, double tolerance) {
  if (repetitions == 0) throw Error(Errc::invalid_argument, "repetitions must be at least 1");
  auto grp = group::Group::create(profile);
  std::vector<double> reenc_us, pair_us, dec_us, reference_us;
  for (std::size_t i = 0; i < warmup + repetitions; ++i) {
    Fixture f(grp, rng, i);
    auto h_input = grp->random_gt(rng);
    auto a = measure(*grp, stage_call(Stage::reenc, grp, f));
    auto b = measure(*grp, [&] { (void)grp->pair(f.sct.c1p, f.rkp.rk1p); });
    auto c = measure(*grp, stage_call(Stage::dec, grp, f));
    auto d = measure(*grp, [&] {
      (void)grp->pair(f.rct.c3, f.user.sk_du);
      (void)grp->pair(f.rct.c1, f.user.sk_du);
      (void)grp->hash_gt_to_g1(h_input);
    });
    if (i < warmup) continue;
    reenc_us.push_back(a.micros);
    pair_us.push_back(b.micros);
    dec_us.push_back(c.micros);
    reference_us.push_back(d.micros);
  }
  return {{"ReEnc vs P", median(reenc_us), median(pair_us), tolerance},
          {"Dec vs 2P+H", median(dec_us), median(reference_us), tolerance}};
}

bool SizeReport::matches_reference() const {
  return key_do == 256 && key_du == 384 && ct == 384 && rk == 384 && ct_prime == 512 &&
         total() == 1920;
}

SizeReport run_size_report(const GroupProfile& profile, RandomSource& rng) {
  auto grp = group::Group::create(profile);
  Fixture f(grp, rng, 0);
  SizeReport report;
  report.profile = profile.name;
  report.key_do = grp->serialize(f.owner.pk_do).size() + grp->serialize(f.owner.sk_do_sanitized).size();
  report.key_du = payload(f.user.pk).size() + grp->serialize(f.user.sk_du).size();
  report.ct = payload(f.sct).size();
  report.rk = payload(f.rkp).size();
  report.ct_prime = payload(f.rct).size();
  return report;
}

}  // namespace medexchain::bench
