#pragma once

// Command-line front end. Every command works on a data directory laid out as
//
//   params/   profile descriptor and both chains' public parameters
//   keys/     hospital master secrets, owners/<id>.key, users/<id>.key
//   store/    content-addressed blobs for chain-a, chain-b, relay and fetched
//             re-encrypted ciphertexts under inbox/<user>/
//   ledger/   node and relay snapshots, the CRF_A beta journal, upload and
//             share indexes
//   audit/    JSONL audit logs

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "medexchain/group.hpp"
#include "medexchain/ledger.hpp"
#include "medexchain/protocol.hpp"

namespace medexchain::cli {

inline constexpr const char* kDataDirEnv = "MEDEXCHAIN_DATA_DIR";

struct CliConfig {
  /// Profile descriptor file; wins over `backend` when set.
  std::optional<std::filesystem::path> profile_path;
  std::filesystem::path data_dir = "medexchain-data";
  std::size_t max_access_count = ledger::kDefaultMaxAccessCount;
  std::int64_t freshness_window_ms = protocol::kDefaultMaxSkewMs;
  std::int64_t latency_ms = 0;
  /// Unset means: the profile recorded by setup, or the pairing profile.
  std::optional<group::BackendKind> backend;

  group::GroupProfile profile() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

/// key=value lines; '#' starts a comment. Keys: profile, data_dir,
/// max_access_count, freshness_window_ms, latency_ms, backend.
void apply_config_text(CliConfig& config, std::string_view text, const std::filesystem::path& base = {});
void apply_config_file(CliConfig& config, const std::filesystem::path& path);
void apply_env(CliConfig& config, const EnvLookup& env);

/// Parses `argv` and runs one command. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env);

}  // namespace medexchain::cli
