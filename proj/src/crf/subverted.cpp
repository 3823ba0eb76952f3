#include "medexchain/crf.hpp"

namespace medexchain::crf {

LeakEncoding LeakEncoding::parity() {
  LeakEncoding enc;
  enc.encode = [](const group::Group& grp, bool bit, RandomSource& rng) {
    for (;;) {
      auto alpha = grp.random_nonzero_scalar(rng);
      if (mpz_odd_p(alpha.value().get_mpz_t()) == static_cast<int>(bit)) return alpha;
    }
  };
  enc.decode = [](const mpz_class& exponent) { return mpz_odd_p(exponent.get_mpz_t()) != 0; };
  return enc;
}

SubversionResult run_subverted_encryptor(CrfA& guard, const scheme::OwnerKeys& owner,
                                         const SubversionConfig& config, RandomSource& leak_bits,
                                         RandomSource& encryptor_rng) {
  const auto& chain = guard.chain();
  const auto& grp = *chain.group;
  if (grp.backend() != group::BackendKind::transparent) {
    throw Error(Errc::unsupported, "the leakage distinguisher needs observable exponents");
  }

  SubversionResult result;
  result.trials = config.trials;
  for (std::size_t i = 0; i < config.trials; ++i) {
    std::uint8_t b = 0;
    leak_bits.fill({&b, 1});
    const bool secret = (b & 1) != 0;

    auto m = grp.random_gt(encryptor_rng);
    auto alpha = config.encoding.encode(grp, secret, encryptor_rng);
    auto ct = scheme::enc(m, chain, owner.pk_do, alpha);

    G1 observed_c1 = ct.c1;
    GT observed_c2 = ct.c2;
    if (config.sanitize) {
      auto out = guard.sanitize_ciphertext(ct, owner.pk_do);
      observed_c1 = out.ciphertext.c1p;
      observed_c2 = out.ciphertext.c2p;
    }

    if (config.encoding.decode(grp.exponent_of(observed_c1)) == secret) ++result.correct_guesses;

    if (config.check_functionality) {
      scheme::OriginalCiphertext seen{observed_c1, observed_c2};
      if (!(scheme::owner_decrypt(seen, owner.sk_do_sanitized) == m)) {
        ++result.functionality_failures;
      }
    }
  }
  return result;
}

}  // namespace medexchain::crf
