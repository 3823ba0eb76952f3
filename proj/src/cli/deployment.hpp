#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "medexchain/cli.hpp"
#include "medexchain/world.hpp"

namespace medexchain::cli {

struct ShareEntry {
  std::string owner;
  std::string user;
  Digest data1{};
};

/// One data directory: the persisted world plus the CLI's own indexes.
class Deployment {
 public:
  /// Generates fresh hospital and CRF masters and writes the layout. Refuses
  /// an existing deployment unless `force`, which clears it first.
  static Deployment create(const CliConfig& config, bool force, RandomSource& rng);
  /// Restores a deployment written by create().
  static Deployment open(const CliConfig& config, RandomSource& rng);

  static bool exists(const std::filesystem::path& data_dir);

  protocol::World& world() { return *world_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Provisions and persists keys. Refuses an existing key file unless `force`.
  scheme::OwnerKeys keygen_owner(const std::string& id, bool force);
  scheme::UserKeys keygen_user(const std::string& id, bool force);
  void require_owner(const std::string& id) const;
  void require_user(const std::string& id) const;

  void record_upload(const Digest& data1, const std::string& owner);
  std::optional<std::string> owner_of(const Digest& data1) const;
  void record_share(const Digest& data2, const ShareEntry& entry);
  std::optional<ShareEntry> share_of(const Digest& data2) const;

  std::filesystem::path inbox_path(const std::string& user, const Digest& data2) const;

  /// Node and relay snapshots plus audit logs.
  void save() const;

 private:
  Deployment(std::filesystem::path dir, std::unique_ptr<protocol::World> world);

  std::filesystem::path key_path(const char* kind, const std::string& id) const;
  nlohmann::ordered_json read_index(const char* name) const;
  void write_index(const char* name, const nlohmann::ordered_json& j) const;

  std::filesystem::path dir_;
  std::unique_ptr<protocol::World> world_;
};

}  // namespace medexchain::cli
