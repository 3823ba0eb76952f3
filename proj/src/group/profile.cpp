#include <sstream>
#include <string>

#include "medexchain/group.hpp"

namespace medexchain::group {

namespace {

constexpr const char* kTypeAOrder = "e91ee858dd01871a651337e899cf5539c576bc9f";
constexpr const char* kTypeAPrime =
    "b580873cca659e51b9a55819f7560b4d296b5edf1d5e49b65531695fe5ca353e"
    "a3222c69a3e9a59d61d234b88b40c7a9d9a65c3ffb93288881e76d4c29a206b3";

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

mpz_class parse_hex(const std::string& s) {
  mpz_class v;
  if (s.empty() || v.set_str(s, 16) != 0) {
    throw Error(Errc::malformed_encoding, "bad hex integer in profile: " + s);
  }
  return v;
}

std::size_t bytes_for(const mpz_class& v) { return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8; }

}  // namespace

const char* to_string(BackendKind kind) noexcept {
  return kind == BackendKind::transparent ? "transparent" : "pairing";
}

BackendKind backend_from_string(std::string_view name) {
  if (name == "transparent") return BackendKind::transparent;
  if (name == "pairing") return BackendKind::pairing;
  throw Error(Errc::unsupported, "unknown backend '" + std::string(name) + "'");
}

GroupProfile GroupProfile::type_a_80() {
  GroupProfile p;
  p.name = "type-a-80";
  p.id = 1;
  p.security_bits = 80;
  p.order = mpz_class(kTypeAOrder, 16);
  p.field_prime = mpz_class(kTypeAPrime, 16);
  p.coordinate_bytes = 64;
  p.scalar_bytes = 20;
  p.backend = BackendKind::pairing;
  return p;
}

GroupProfile GroupProfile::transparent_80() {
  GroupProfile p = type_a_80();
  p.name = "transparent-80";
  p.id = 2;
  p.field_prime = 0;
  p.backend = BackendKind::transparent;
  return p;
}

GroupProfile GroupProfile::transparent_small(unsigned long q) {
  GroupProfile p;
  p.name = "transparent-small";
  p.id = 3;
  p.security_bits = 0;
  p.order = q;
  if (mpz_probab_prime_p(p.order.get_mpz_t(), 30) == 0) {
    throw Error(Errc::invalid_scalar, "group order must be prime");
  }
  p.field_prime = 0;
  p.coordinate_bytes = bytes_for(p.order);
  p.scalar_bytes = bytes_for(p.order);
  p.backend = BackendKind::transparent;
  return p;
}

GroupProfile GroupProfile::by_id(std::uint8_t id) {
  switch (id) {
    case 1: return type_a_80();
    case 2: return transparent_80();
    case 3: return transparent_small();
    default: throw Error(Errc::profile_mismatch, "unknown profile id " + std::to_string(id));
  }
}

std::string to_descriptor(const GroupProfile& profile) {
  std::ostringstream out;
  out << "name=" << profile.name << '\n'
      << "id=" << static_cast<int>(profile.id) << '\n'
      << "backend=" << to_string(profile.backend) << '\n'
      << "security_bits=" << profile.security_bits << '\n'
      << "q=" << profile.order.get_str(16) << '\n'
      << "field_prime=" << profile.field_prime.get_str(16) << '\n'
      << "coordinate_bytes=" << profile.coordinate_bytes << '\n'
      << "scalar_bytes=" << profile.scalar_bytes << '\n';
  if (profile.generator) {
    out << "generator_x=" << profile.generator->first.get_str(16) << '\n'
        << "generator_y=" << profile.generator->second.get_str(16) << '\n';
  }
  return out.str();
}

GroupProfile parse_descriptor(std::string_view text) {
  GroupProfile p;
  p.name = "custom";
  std::optional<mpz_class> gx, gy;
  bool have_q = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::malformed_encoding, "expected key=value: " + line);
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "name") p.name = value;
      else if (key == "id") p.id = static_cast<std::uint8_t>(std::stoi(value));
      else if (key == "backend") p.backend = backend_from_string(value);
      else if (key == "security_bits") p.security_bits = std::stoi(value);
      else if (key == "q") { p.order = parse_hex(value); have_q = true; }
      else if (key == "field_prime") p.field_prime = parse_hex(value);
      else if (key == "coordinate_bytes") p.coordinate_bytes = std::stoul(value);
      else if (key == "scalar_bytes") p.scalar_bytes = std::stoul(value);
      else if (key == "generator_x") gx = parse_hex(value);
      else if (key == "generator_y") gy = parse_hex(value);
      else throw Error(Errc::malformed_encoding, "unknown profile key: " + key);
    } catch (const std::logic_error&) {
      throw Error(Errc::malformed_encoding, "bad value for " + key);
    }
  }
  if (!have_q) throw Error(Errc::malformed_encoding, "profile is missing q");
  if (mpz_probab_prime_p(p.order.get_mpz_t(), 30) == 0) {
    throw Error(Errc::invalid_scalar, "profile q is not prime");
  }
  if (p.backend == BackendKind::pairing && p.field_prime == 0) {
    throw Error(Errc::malformed_encoding, "pairing profile requires field_prime");
  }
  if (gx.has_value() != gy.has_value()) {
    throw Error(Errc::malformed_encoding, "generator needs both coordinates");
  }
  if (gx) p.generator = std::make_pair(*gx, *gy);
  return p;
}

}  // namespace medexchain::group
