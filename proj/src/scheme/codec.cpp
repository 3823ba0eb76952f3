#include "medexchain/codec.hpp"

namespace medexchain::scheme {

namespace {

class Writer {
 public:
  explicit Writer(const group::Group& grp) : grp_(grp) {}

  Writer& g1(const G1& x) {
    append(out_, grp_.serialize(x));
    return *this;
  }
  Writer& gt(const GT& x) {
    append(out_, grp_.serialize(x));
    return *this;
  }
  Writer& scalar(const Scalar& x) {
    append(out_, grp_.serialize(x));
    return *this;
  }
  Writer& identity(ByteView id) {
    if (id.size() > 0xffff) throw Error(Errc::invalid_identity, "identity longer than 65535 bytes");
    append_u16_be(out_, static_cast<std::uint16_t>(id.size()));
    append(out_, id);
    return *this;
  }
  Writer& u8(std::uint8_t v) {
    append_u8(out_, v);
    return *this;
  }

  Bytes take() { return std::move(out_); }

 private:
  const group::Group& grp_;
  Bytes out_;
};

class Reader {
 public:
  Reader(const GroupPtr& grp, ByteView data) : grp_(grp), in_(data) {}

  G1 g1() { return grp_->deserialize_g1(in_.take(grp_->profile().g1_bytes())); }
  GT gt() { return grp_->deserialize_gt(in_.take(grp_->profile().gt_bytes())); }
  Scalar scalar() { return grp_->deserialize_scalar(in_.take(grp_->profile().scalar_bytes)); }
  Bytes identity() {
    auto n = in_.u16_be();
    auto v = in_.take(n);
    return Bytes(v.begin(), v.end());
  }
  std::uint8_t u8() { return in_.u8(); }
  void done() const { in_.expect_done(); }

  void expect_kind(ObjectKind kind) {
    if (in_.u8() != static_cast<std::uint8_t>(kind)) {
      throw Error(Errc::malformed_encoding, "unexpected object kind");
    }
  }

  void expect_file_header(ObjectKind kind) {
    auto magic = in_.take(kKeyFileMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kKeyFileMagic.begin())) {
      throw Error(Errc::malformed_encoding, "bad key file magic");
    }
    expect_kind(kind);
    if (in_.u8() != grp_->profile().id) {
      throw Error(Errc::profile_mismatch, "key file was written for a different profile");
    }
  }

 private:
  const GroupPtr& grp_;
  ByteReader in_;
};

Bytes frame(ObjectKind kind, const Bytes& body) {
  Bytes out;
  out.reserve(body.size() + 1);
  out.push_back(static_cast<std::uint8_t>(kind));
  append(out, body);
  return out;
}

Bytes file_header(ObjectKind kind, const group::Group& grp) {
  Bytes out(kKeyFileMagic.begin(), kKeyFileMagic.end());
  out.push_back(static_cast<std::uint8_t>(kind));
  out.push_back(grp.profile().id);
  return out;
}

const group::Group& group_of(const G1& x) { return x.group(); }

}  // namespace

// ---- payloads ----

Bytes payload(const SanitizedCiphertext& ct) {
  return Writer(group_of(ct.c1p)).g1(ct.c1p).gt(ct.c2p).g1(ct.c3p).take();
}

Bytes payload(const OriginalCiphertext& ct) {
  return Writer(group_of(ct.c1)).g1(ct.c1).gt(ct.c2).take();
}

Bytes payload(const ReKey& rk) {
  return Writer(group_of(rk.rk1)).g1(rk.rk1).g1(rk.rk2).gt(rk.rk3).take();
}

Bytes payload(const SanitizedReKey& rk) {
  return Writer(group_of(rk.rk1p)).g1(rk.rk1p).g1(rk.rk2p).gt(rk.rk3p).take();
}

Bytes payload(const ReCiphertext& ct) {
  return Writer(group_of(ct.c1)).g1(ct.c1).gt(ct.c2).g1(ct.c3).gt(ct.c4).take();
}

Bytes payload(const UserPublicKey& pk) {
  return Writer(group_of(pk.pk1)).g1(pk.pk1).g1(pk.pk2).take();
}

// ---- wire ----

Bytes encode_wire(const OriginalCiphertext& ct) {
  return frame(ObjectKind::original_ciphertext, payload(ct));
}
Bytes encode_wire(const SanitizedCiphertext& ct) {
  return frame(ObjectKind::sanitized_ciphertext, payload(ct));
}
Bytes encode_wire(const ReKey& rk) { return frame(ObjectKind::rekey, payload(rk)); }
Bytes encode_wire(const SanitizedReKey& rk) {
  return frame(ObjectKind::sanitized_rekey, payload(rk));
}
Bytes encode_wire(const ReCiphertext& ct) { return frame(ObjectKind::reciphertext, payload(ct)); }
Bytes encode_wire(const UserPublicKey& pk) {
  return frame(ObjectKind::user_public_key, payload(pk));
}

OriginalCiphertext decode_original_ciphertext(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::original_ciphertext);
  OriginalCiphertext ct;
  ct.c1 = r.g1();
  ct.c2 = r.gt();
  r.done();
  return ct;
}

SanitizedCiphertext decode_sanitized_ciphertext(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::sanitized_ciphertext);
  SanitizedCiphertext ct;
  ct.c1p = r.g1();
  ct.c2p = r.gt();
  ct.c3p = r.g1();
  r.done();
  return ct;
}

ReKey decode_rekey(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::rekey);
  ReKey rk;
  rk.rk1 = r.g1();
  rk.rk2 = r.g1();
  rk.rk3 = r.gt();
  r.done();
  return rk;
}

SanitizedReKey decode_sanitized_rekey(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::sanitized_rekey);
  SanitizedReKey rk;
  rk.rk1p = r.g1();
  rk.rk2p = r.g1();
  rk.rk3p = r.gt();
  r.done();
  return rk;
}

ReCiphertext decode_reciphertext(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::reciphertext);
  ReCiphertext ct;
  ct.c1 = r.g1();
  ct.c2 = r.gt();
  ct.c3 = r.g1();
  ct.c4 = r.gt();
  r.done();
  return ct;
}

UserPublicKey decode_user_public_key(const GroupPtr& grp, ByteView wire) {
  Reader r(grp, wire);
  r.expect_kind(ObjectKind::user_public_key);
  UserPublicKey pk;
  pk.pk1 = r.g1();
  pk.pk2 = r.g1();
  r.done();
  return pk;
}

// ---- key files ----

Bytes encode_file(const ChainParams& params) {
  const auto& grp = *params.group;
  Bytes out = file_header(ObjectKind::chain_params, grp);
  append(out, Writer(grp).g1(params.system_public_key).u8(static_cast<std::uint8_t>(params.tag)).take());
  return out;
}

Bytes encode_file(const MasterSecrets& secrets) {
  const auto& grp = secrets.hospital_master.group();
  Bytes out = file_header(ObjectKind::master_secrets, grp);
  append(out, Writer(grp).scalar(secrets.hospital_master).scalar(secrets.crf_master).take());
  return out;
}

Bytes encode_file(const OwnerKeys& keys) {
  const auto& grp = keys.pk_do.group();
  Bytes out = file_header(ObjectKind::owner_keys, grp);
  append(out, Writer(grp)
                  .identity(keys.identity)
                  .g1(keys.pk_do)
                  .g1(keys.sk_do_raw)
                  .g1(keys.sk_do_sanitized)
                  .take());
  return out;
}

Bytes encode_file(const UserKeys& keys) {
  const auto& grp = keys.sk_du.group();
  Bytes out = file_header(ObjectKind::user_keys, grp);
  append(out, Writer(grp)
                  .identity(keys.identity)
                  .g1(keys.partial_raw)
                  .g1(keys.partial_sanitized)
                  .scalar(keys.user_secret)
                  .g1(keys.sk_du)
                  .g1(keys.pk.pk1)
                  .g1(keys.pk.pk2)
                  .take());
  return out;
}

ChainParams decode_chain_params_file(const GroupPtr& grp, ByteView file) {
  Reader r(grp, file);
  r.expect_file_header(ObjectKind::chain_params);
  ChainParams p;
  p.group = grp;
  p.system_public_key = r.g1();
  auto tag = r.u8();
  if (tag != static_cast<std::uint8_t>(ChainTag::A) && tag != static_cast<std::uint8_t>(ChainTag::B)) {
    throw Error(Errc::malformed_encoding, "unknown chain tag");
  }
  p.tag = static_cast<ChainTag>(tag);
  r.done();
  return p;
}

MasterSecrets decode_master_secrets_file(const GroupPtr& grp, ByteView file) {
  Reader r(grp, file);
  r.expect_file_header(ObjectKind::master_secrets);
  MasterSecrets m;
  m.hospital_master = r.scalar();
  m.crf_master = r.scalar();
  r.done();
  return m;
}

OwnerKeys decode_owner_keys_file(const GroupPtr& grp, ByteView file) {
  Reader r(grp, file);
  r.expect_file_header(ObjectKind::owner_keys);
  OwnerKeys k;
  k.identity = r.identity();
  k.pk_do = r.g1();
  k.sk_do_raw = r.g1();
  k.sk_do_sanitized = r.g1();
  r.done();
  return k;
}

UserKeys decode_user_keys_file(const GroupPtr& grp, ByteView file) {
  Reader r(grp, file);
  r.expect_file_header(ObjectKind::user_keys);
  UserKeys k;
  k.identity = r.identity();
  k.partial_raw = r.g1();
  k.partial_sanitized = r.g1();
  k.user_secret = r.scalar();
  k.sk_du = r.g1();
  k.pk.pk1 = r.g1();
  k.pk.pk2 = r.g1();
  r.done();
  return k;
}

ObjectKind peek_kind(ByteView data) {
  if (data.size() >= kKeyFileMagic.size() + 2 &&
      std::equal(kKeyFileMagic.begin(), kKeyFileMagic.end(), data.begin())) {
    return static_cast<ObjectKind>(data[kKeyFileMagic.size()]);
  }
  if (data.empty()) throw Error(Errc::malformed_encoding, "empty object");
  return static_cast<ObjectKind>(data[0]);
}

}  // namespace medexchain::scheme
