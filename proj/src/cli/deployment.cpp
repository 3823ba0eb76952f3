#include "deployment.hpp"

#include <fstream>
#include <sstream>

#include "medexchain/codec.hpp"

namespace medexchain::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSubdirs[] = {"params", "keys", "store", "ledger", "audit"};

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const fs::path& path) {
  auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_file(const fs::path& path, ByteView data, bool secret = false) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
  }
  if (secret) fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write);
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, std::string_view text) { write_file(path, as_bytes(text)); }

void check_id(const std::string& id) {
  if (id.empty() || id.size() > 64 ||
      id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.") != std::string::npos ||
      id[0] == '.') {
    throw Error(Errc::invalid_identity, "identities are 1-64 characters from [A-Za-z0-9._-]: '" + id + "'");
  }
}

protocol::WorldConfig world_config(const CliConfig& config, const fs::path& dir,
                                   const group::GroupProfile& profile, bool register_chains) {
  protocol::WorldConfig wc;
  wc.profile = profile;
  wc.max_access_count = config.max_access_count;
  wc.freshness_window_ms = config.freshness_window_ms;
  wc.transport.latency_ms = config.latency_ms;
  wc.data_dir = dir;
  wc.register_chains = register_chains;
  return wc;
}

struct StateFiles {
  fs::path chain_a, chain_b, relay, audit_a, audit_b, audit_relay;
};

StateFiles state_files(const fs::path& dir) {
  return {dir / "ledger" / "chain-a.json", dir / "ledger" / "chain-b.json", dir / "ledger" / "relay.json",
          dir / "audit" / "chain-a.jsonl", dir / "audit" / "chain-b.jsonl", dir / "audit" / "relay.jsonl"};
}

void write_audit(const fs::path& path, const ledger::AuditLog& log) {
  std::ostringstream out;
  log.write_jsonl(out);
  write_text(path, out.str());
}

void load_audit(const fs::path& path, ledger::AuditLog& log) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  log.load_jsonl(in);
}

}  // namespace

Deployment::Deployment(fs::path dir, std::unique_ptr<protocol::World> world)
    : dir_(std::move(dir)), world_(std::move(world)) {}

bool Deployment::exists(const fs::path& data_dir) { return fs::exists(data_dir / "params" / "profile.txt"); }

Deployment Deployment::create(const CliConfig& config, bool force, RandomSource& rng) {
  const auto& dir = config.data_dir;
  if (exists(dir)) {
    if (!force) {
      throw Error(Errc::duplicate_registration,
                  "a deployment already exists in " + dir.string() + "; pass --force to replace it");
    }
    for (const char* sub : kSubdirs) fs::remove_all(dir / sub);
  }
  for (const char* sub : kSubdirs) fs::create_directories(dir / sub);

  auto profile = config.profile();
  auto grp = group::Group::create(profile);
  auto secrets = protocol::WorldSecrets::generate(*grp, rng);
  auto world = std::make_unique<protocol::World>(world_config(config, dir, profile, true), secrets, rng);

  write_text(dir / "params" / "profile.txt", group::to_descriptor(profile));
  write_file(dir / "params" / "chain-a.params", scheme::encode_file(world->chain_a()));
  write_file(dir / "params" / "chain-b.params", scheme::encode_file(world->chain_b()));
  write_file(dir / "keys" / "hospital-a.master", scheme::encode_file(world->secrets().chain_a), true);
  write_file(dir / "keys" / "hospital-b.master", scheme::encode_file(world->secrets().chain_b), true);

  Deployment d(dir, std::move(world));
  d.save();
  return d;
}

Deployment Deployment::open(const CliConfig& config, RandomSource& rng) {
  const auto& dir = config.data_dir;
  if (!exists(dir)) {
    throw Error(Errc::not_found, "no deployment in " + dir.string() + "; run `medexchain setup` first");
  }
  auto profile = group::parse_descriptor(read_text(dir / "params" / "profile.txt"));
  if (config.profile_path || config.backend) {
    auto wanted = config.profile();
    if (group::to_descriptor(wanted) != group::to_descriptor(profile)) {
      throw Error(Errc::profile_mismatch, "the deployment in " + dir.string() + " uses profile " + profile.name +
                                              ", not " + wanted.name + "; drop the override or run `medexchain setup --force`");
    }
  }
  auto grp = group::Group::create(profile);
  protocol::WorldSecrets secrets{
      scheme::decode_master_secrets_file(grp, read_file(dir / "keys" / "hospital-a.master")),
      scheme::decode_master_secrets_file(grp, read_file(dir / "keys" / "hospital-b.master"))};
  auto world = std::make_unique<protocol::World>(world_config(config, dir, profile, false), secrets, rng);

  auto stored_a = scheme::decode_chain_params_file(world->group(), read_file(dir / "params" / "chain-a.params"));
  auto stored_b = scheme::decode_chain_params_file(world->group(), read_file(dir / "params" / "chain-b.params"));
  if (stored_a.system_public_key != world->chain_a().system_public_key ||
      stored_b.system_public_key != world->chain_b().system_public_key) {
    throw Error(Errc::tamper_detected, "chain parameters in " + (dir / "params").string() +
                                           " do not match the master secrets");
  }

  auto files = state_files(dir);
  world->node_a().load_state(files.chain_a);
  world->node_b().load_state(files.chain_b);
  world->relay().load_state(files.relay);
  load_audit(files.audit_a, world->node_a().audit());
  load_audit(files.audit_b, world->node_b().audit());
  load_audit(files.audit_relay, world->relay().audit());

  for (const auto& [sub, is_owner] : {std::pair{"owners", true}, std::pair{"users", false}}) {
    auto keys_dir = dir / "keys" / sub;
    if (!fs::exists(keys_dir)) continue;
    for (const auto& entry : fs::directory_iterator(keys_dir)) {
      if (entry.path().extension() != ".key") continue;
      auto bytes = read_file(entry.path());
      if (is_owner) {
        world->add_owner(scheme::decode_owner_keys_file(world->group(), bytes));
      } else {
        world->add_user(scheme::decode_user_keys_file(world->group(), bytes));
      }
    }
  }
  return Deployment(dir, std::move(world));
}

fs::path Deployment::key_path(const char* kind, const std::string& id) const {
  check_id(id);
  return dir_ / "keys" / kind / (id + ".key");
}

scheme::OwnerKeys Deployment::keygen_owner(const std::string& id, bool force) {
  auto path = key_path("owners", id);
  if (fs::exists(path) && !force) {
    throw Error(Errc::duplicate_registration, "owner key " + path.string() + " exists; pass --force to replace it");
  }
  auto keys = world_->provision_owner(id);
  write_file(path, scheme::encode_file(keys), true);
  return keys;
}

scheme::UserKeys Deployment::keygen_user(const std::string& id, bool force) {
  auto path = key_path("users", id);
  if (fs::exists(path) && !force) {
    throw Error(Errc::duplicate_registration, "user key " + path.string() + " exists; pass --force to replace it");
  }
  auto keys = world_->provision_user(id);
  write_file(path, scheme::encode_file(keys), true);
  return keys;
}

void Deployment::require_owner(const std::string& id) const {
  if (!fs::exists(key_path("owners", id))) {
    throw Error(Errc::not_found, "unknown data owner '" + id + "'; run `medexchain keygen owner " + id + "` first");
  }
}

void Deployment::require_user(const std::string& id) const {
  if (!fs::exists(key_path("users", id))) {
    throw Error(Errc::not_found, "unknown data user '" + id + "'; run `medexchain keygen user " + id + "` first");
  }
}

nlohmann::ordered_json Deployment::read_index(const char* name) const {
  auto path = dir_ / "ledger" / name;
  if (!fs::exists(path)) return nlohmann::ordered_json::object();
  return nlohmann::ordered_json::parse(read_text(path));
}

void Deployment::write_index(const char* name, const nlohmann::ordered_json& j) const {
  write_text(dir_ / "ledger" / name, j.dump(2) + "\n");
}

void Deployment::record_upload(const Digest& data1, const std::string& owner) {
  auto j = read_index("uploads.json");
  j[to_hex(data1)] = owner;
  write_index("uploads.json", j);
}

std::optional<std::string> Deployment::owner_of(const Digest& data1) const {
  auto j = read_index("uploads.json");
  auto it = j.find(to_hex(data1));
  if (it == j.end()) return std::nullopt;
  return it->get<std::string>();
}

void Deployment::record_share(const Digest& data2, const ShareEntry& entry) {
  auto j = read_index("shares.json");
  j[to_hex(data2)] = {{"owner", entry.owner}, {"user", entry.user}, {"data1", to_hex(entry.data1)}};
  write_index("shares.json", j);
}

std::optional<ShareEntry> Deployment::share_of(const Digest& data2) const {
  auto j = read_index("shares.json");
  auto it = j.find(to_hex(data2));
  if (it == j.end()) return std::nullopt;
  return ShareEntry{it->at("owner").get<std::string>(), it->at("user").get<std::string>(),
                    digest_from_hex(it->at("data1").get<std::string>())};
}

fs::path Deployment::inbox_path(const std::string& user, const Digest& data2) const {
  check_id(user);
  return dir_ / "store" / "inbox" / user / (to_hex(data2) + ".json");
}

void Deployment::save() const {
  auto files = state_files(dir_);
  world_->node_a().save_state(files.chain_a);
  world_->node_b().save_state(files.chain_b);
  world_->relay().save_state(files.relay);
  write_audit(files.audit_a, world_->node_a().audit());
  write_audit(files.audit_b, world_->node_b().audit());
  write_audit(files.audit_relay, world_->relay().audit());
}

}  // namespace medexchain::cli
