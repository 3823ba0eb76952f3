#pragma once

// Per-stage and per-object benchmarks, plus a concurrent run of the full
// cross-chain exchange.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "medexchain/world.hpp"

namespace medexchain::bench {

using group::GroupProfile;
using group::OpCounters;

// ---- stage bench ----

enum class Stage { keygen_do, keygen_du, enc, rekeygen, reenc, dec };

const char* to_string(Stage stage) noexcept;
const std::vector<Stage>& all_stages();
/// The per-stage operation counts of the scheme.
OpCounters expected_counters(Stage stage);

struct StageReport {
  std::string stage;
  OpCounters counters;
  /// True when every repetition produced exactly `counters` and they match
  /// expected_counters.
  bool counters_exact = false;
  std::size_t repetitions = 0;
  double mean_us = 0;
  double median_us = 0;
  std::string backend;
};

struct StageBenchConfig {
  GroupProfile profile = GroupProfile::type_a_80();
  std::size_t repetitions = 50;
  std::size_t warmup = 5;
};

/// Fresh inputs per repetition; counters are snapshot around each stage call
/// and only the call itself is timed. Single-threaded.
std::vector<StageReport> run_stage_bench(const StageBenchConfig& config, RandomSource& rng);

/// Median cost of the primitives the ratio checks compare against.
struct PrimitiveTimings {
  double pairing_us = 0;
  double hash_gt_us = 0;
  double e1_us = 0;
  double e2_us = 0;
  std::string backend;
};

PrimitiveTimings run_primitive_bench(const GroupProfile& profile, std::size_t repetitions,
                                     std::size_t warmup, RandomSource& rng);

struct RatioCheck {
  std::string name;
  double measured_us = 0;
  double reference_us = 0;
  double tolerance = 0.25;

  double ratio() const { return reference_us == 0 ? 0 : measured_us / reference_us; }
  bool within() const { return reference_us > 0 && std::abs(ratio() - 1.0) <= tolerance; }
};

/// ReEnc against one pairing, Dec against two pairings plus one hash. Each
/// repetition times the stage and its reference back to back on the same
/// inputs, so slow drift in machine speed affects both sides alike.
std::vector<RatioCheck> run_ratio_checks(const GroupProfile& profile, std::size_t repetitions,
                                         std::size_t warmup, RandomSource& rng,
                                         double tolerance = 0.25);

// ---- sizes ----

struct SizeReport {
  std::string profile;
  std::size_t key_do = 0;
  std::size_t key_du = 0;
  std::size_t ct = 0;
  std::size_t rk = 0;
  std::size_t ct_prime = 0;

  std::size_t total() const { return key_do + key_du + ct + rk + ct_prime; }
  /// The reference byte counts for the 80-bit profile.
  bool matches_reference() const;
};

/// Serializes freshly generated objects and measures them.
SizeReport run_size_report(const GroupProfile& profile, RandomSource& rng);

// ---- system bench ----

struct SystemBenchConfig {
  std::size_t request_count = 1'000;
  std::size_t concurrency = 8;
  int latency_ms = 0;
  GroupProfile profile = GroupProfile::transparent_80();
  std::size_t owners = 4;
  std::size_t users = 0;  // 0 picks enough users to stay under the access limit
  std::size_t records = 32;
  std::size_t max_access_count = ledger::kDefaultMaxAccessCount;
  double drop_probability = 0;
  std::uint64_t seed = 1;
};

struct OutcomeTallies {
  std::size_t success = 0;
  std::size_t refusal = 0;
  std::size_t reject = 0;
  std::size_t timeout = 0;

  std::size_t total() const { return success + refusal + reject + timeout; }
};

struct SystemRunReport {
  std::size_t request_count = 0;
  std::size_t concurrency = 0;
  int latency_ms = 0;
  std::string backend;
  double wall_seconds = 0;
  double throughput_rps = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  OutcomeTallies tallies;
  std::size_t verified_plaintexts = 0;
  std::size_t plaintext_mismatches = 0;
  /// Successes per user, in user order.
  std::vector<std::size_t> successes_per_user;
  std::vector<std::size_t> refusals_per_user;

  bool conserved() const { return tallies.total() == request_count; }
};

/// Provisions a world, stores `records` PHRs and drives `request_count`
/// orchestrations from `concurrency` worker threads. Users take requests round
/// robin; every success is checked against the uploaded M and PHR.
SystemRunReport run_system_bench(const SystemBenchConfig& config);

// ---- reports ----

inline constexpr std::string_view kStageCsvHeader = "stage,e1,e2,p,h,mean_us,median_us,backend";

/// `counters_only` writes zero timings so equal inputs give equal bytes.
void write_stage_csv(std::ostream& out, const std::vector<StageReport>& reports,
                     bool counters_only = false);
void write_size_csv(std::ostream& out, const SizeReport& report);
void write_system_csv(std::ostream& out, const std::vector<SystemRunReport>& reports);

nlohmann::ordered_json to_json(const StageReport& r, bool counters_only = false);
nlohmann::ordered_json to_json(const SizeReport& r);
nlohmann::ordered_json to_json(const SystemRunReport& r);
nlohmann::ordered_json to_json(const std::vector<RatioCheck>& checks);

StageReport stage_report_from_json(const nlohmann::json& j);
SizeReport size_report_from_json(const nlohmann::json& j);
SystemRunReport system_report_from_json(const nlohmann::json& j);

/// Full report document: {"schema":"medexchain-bench/1", "stages", "sizes",
/// "system", "ratios"}; absent sections are omitted.
struct ReportBundle {
  std::vector<StageReport> stages;
  std::optional<SizeReport> sizes;
  std::vector<SystemRunReport> system;
  std::vector<RatioCheck> ratios;
};

inline constexpr std::string_view kReportSchema = "medexchain-bench/1";

nlohmann::ordered_json to_json(const ReportBundle& bundle, bool counters_only = false);
ReportBundle bundle_from_json(const nlohmann::json& j);
/// Structural check of a report document; returns one message per problem.
std::vector<std::string> validate_report(const nlohmann::json& j);

/// Writes report.csv-style files into `dir`: stages.csv, sizes.csv,
/// system.csv and report.json for the sections present.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir,
                 bool counters_only = false);

}  // namespace medexchain::bench
