#include "medexchain/codec.hpp"
#include "medexchain/digest.hpp"
#include "medexchain/protocol.hpp"

namespace medexchain::protocol {

const char* to_string(MessageKind kind) noexcept {
  static constexpr const char* names[] = {"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8"};
  auto i = static_cast<std::size_t>(kind);
  return i >= 1 && i <= 8 ? names[i - 1] : "M?";
}

const char* to_string(ActorRole role) noexcept {
  switch (role) {
    case ActorRole::DO: return "DO";
    case ActorRole::DU: return "DU";
    case ActorRole::HospitalA: return "HospitalA";
    case ActorRole::Relay: return "Relay";
  }
  return "?";
}

std::string_view role_tag(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::M1: return "request_1";
    case MessageKind::M2: return "request_2";
    case MessageKind::M3: return "request_3";
    case MessageKind::M4: return "respond_1";
    case MessageKind::M5: return "respond_2";
    case MessageKind::M6: return "respond_3";
    case MessageKind::M7: return "request_4";
    case MessageKind::M8: return "respond_4";
  }
  return "";
}

ActorId make_actor_id(ActorRole role, std::string_view name) {
  Bytes seed = to_bytes("medexchain/actor:");
  seed.push_back(static_cast<std::uint8_t>(role));
  append(seed, as_bytes(name));
  auto d = sha256(seed);
  ActorId id;
  std::copy_n(d.begin(), id.size(), id.begin());
  return id;
}

// ---- schemas ----

namespace {

using C = FieldClass;
using F = FieldTag;

constexpr FieldSpec kLabel{F::label, C::label, "label"};
constexpr FieldSpec kPkDo{F::pk_do, C::public_key, "pk_do"};
constexpr FieldSpec kPkDu{F::pk_du, C::public_key, "pk_du"};
constexpr FieldSpec kDuId{F::du_identity, C::identity, "du_identity"};
constexpr FieldSpec kData1{F::data1, C::identifier, "data1"};
constexpr FieldSpec kData2{F::data2, C::identifier, "data2"};
constexpr FieldSpec kDem{F::dem_payload, C::ciphertext, "dem_payload"};

constexpr std::array kM1{FieldSpec{F::sealed_key, C::ciphertext, "sealed_key"},
                         FieldSpec{F::sealed_body, C::sealed, "sealed_body"}};
constexpr std::array kM1Body{kLabel,
                             kPkDo,
                             kPkDu,
                             kDuId,
                             kData1,
                             FieldSpec{F::token_t1, C::token, "token_t1"},
                             FieldSpec{F::token_t2, C::token, "token_t2"},
                             FieldSpec{F::timestamp, C::freshness, "T1"},
                             FieldSpec{F::nonce, C::freshness, "N1"}};
constexpr std::array kM2{kLabel, kPkDo, kPkDu, kDuId, kData1, FieldSpec{F::rekey, C::rekey, "rekey"}};
constexpr std::array kM3{kLabel,
                         kPkDo,
                         kPkDu,
                         kDuId,
                         FieldSpec{F::sanitized_ciphertext, C::ciphertext, "c_do"},
                         FieldSpec{F::rekey, C::rekey, "rekey"},
                         kDem};
constexpr std::array kM4{kLabel, kData2};
constexpr std::array kM5{kLabel, kData2};
constexpr std::array kM6{kLabel, kData2};
constexpr std::array kM7{kLabel, kPkDo, kPkDu, kDuId, kData2};
constexpr std::array kM8{kLabel, FieldSpec{F::reciphertext, C::ciphertext, "c_du"}, kDem};

template <std::size_t N>
constexpr bool all_public(const std::array<FieldSpec, N>& fields) {
  for (const auto& f : fields) {
    if (is_secret(f.cls)) return false;
  }
  return true;
}

static_assert(all_public(kM1) && all_public(kM1Body) && all_public(kM2) && all_public(kM3) &&
                  all_public(kM4) && all_public(kM5) && all_public(kM6) && all_public(kM7) &&
                  all_public(kM8),
              "envelope schemas must not carry secret material");

constexpr std::size_t kHeaderBytes = 1 + 8 + 8 + 8 + 16;

}  // namespace

std::span<const FieldSpec> schema(MessageKind kind) {
  switch (kind) {
    case MessageKind::M1: return kM1;
    case MessageKind::M2: return kM2;
    case MessageKind::M3: return kM3;
    case MessageKind::M4: return kM4;
    case MessageKind::M5: return kM5;
    case MessageKind::M6: return kM6;
    case MessageKind::M7: return kM7;
    case MessageKind::M8: return kM8;
  }
  throw Error(Errc::malformed_encoding, "unknown message kind");
}

std::span<const FieldSpec> sealed_request_schema() { return kM1Body; }

bool schemas_are_public() {
  auto ok = [](std::span<const FieldSpec> fields) {
    for (const auto& f : fields) {
      if (is_secret(f.cls)) return false;
    }
    return true;
  };
  for (int k = 1; k <= 8; ++k) {
    if (!ok(schema(static_cast<MessageKind>(k)))) return false;
  }
  return ok(sealed_request_schema());
}

// ---- envelope ----

Bytes encode_envelope(const Envelope& env) {
  if (env.fields.size() != schema(env.kind).size()) {
    throw Error(Errc::malformed_encoding, std::string("wrong field count for ") + to_string(env.kind));
  }
  Bytes out;
  out.reserve(kHeaderBytes);
  append_u8(out, static_cast<std::uint8_t>(env.kind));
  append(out, env.sender);
  append(out, env.recipient);
  append_u64_be(out, static_cast<std::uint64_t>(env.timestamp_ms));
  append(out, env.nonce);
  append(out, pack_fields(env.fields));
  return out;
}

Bytes pack_fields(const std::vector<Bytes>& fields) {
  Bytes out;
  for (const auto& f : fields) {
    append_u32_be(out, static_cast<std::uint32_t>(f.size()));
    append(out, f);
  }
  return out;
}

std::vector<Bytes> unpack_fields(ByteView data, std::size_t count) {
  ByteReader in(data);
  std::vector<Bytes> fields;
  fields.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto len = in.u32_be();
    auto body = in.take(len);
    fields.emplace_back(body.begin(), body.end());
  }
  in.expect_done();
  return fields;
}

Envelope decode_envelope(ByteView wire) {
  ByteReader in(wire);
  Envelope env;
  auto kind = in.u8();
  if (kind < 1 || kind > 8) throw Error(Errc::malformed_encoding, "unknown message kind");
  env.kind = static_cast<MessageKind>(kind);
  auto sender = in.take(8);
  std::copy(sender.begin(), sender.end(), env.sender.begin());
  auto recipient = in.take(8);
  std::copy(recipient.begin(), recipient.end(), env.recipient.begin());
  env.timestamp_ms = static_cast<std::int64_t>(in.u64_be());
  auto nonce = in.take(16);
  std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
  env.fields = unpack_fields(in.take(in.remaining()), schema(env.kind).size());
  return env;
}

// ---- field encoders ----

Bytes field(std::string_view s) { return to_bytes(s); }
Bytes field(const Digest& d) { return Bytes(d.begin(), d.end()); }
Bytes field(const scheme::G1& x) { return x.group().serialize(x); }
Bytes field(const scheme::UserPublicKey& pk) { return scheme::encode_wire(pk); }
Bytes field(const scheme::OriginalCiphertext& ct) { return scheme::encode_wire(ct); }
Bytes field(const scheme::SanitizedCiphertext& ct) { return scheme::encode_wire(ct); }
Bytes field(const scheme::ReKey& rk) { return scheme::encode_wire(rk); }
Bytes field(const scheme::SanitizedReKey& rk) { return scheme::encode_wire(rk); }
Bytes field(const scheme::ReCiphertext& ct) { return scheme::encode_wire(ct); }

}  // namespace medexchain::protocol
