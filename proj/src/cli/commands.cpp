#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "deployment.hpp"
#include "medexchain/bench.hpp"
#include "medexchain/codec.hpp"

namespace medexchain::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kSamplePhr =
    "patient: 4471\nencounter: 2026-03-14 cardiology\nbp: 128/82 mmHg\nhr: 71 bpm\n"
    "note: stable, continue current medication\n";

struct Options {
  std::string config_file;
  std::string backend;
  std::string data_dir;
  bool json = false;
  bool force = false;
  bool reveal_secrets = false;
};

// What a command reports: a JSON document and its human-readable rendering.
struct Report {
  ordered_json json = ordered_json::object();
  std::ostringstream text;
};

Bytes read_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_output(const fs::path& path, ByteView data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

Digest parse_digest(const std::string& hex, const char* what) {
  try {
    return digest_from_hex(hex);
  } catch (const Error&) {
    throw Error(Errc::invalid_argument, std::string(what) + " must be 64 hex digits");
  }
}

std::string hex_of(const group::Group& grp, const group::G1& x) { return to_hex(grp.serialize(x)); }

std::string printable(ByteView data) {
  std::string out;
  for (auto c : data) {
    if (c == '\n' || c == '\t' || (c >= 0x20 && c < 0x7f)) {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\x";
      out += to_hex(ByteView(&c, 1));
    }
  }
  return out;
}

ordered_json audit_json(const std::vector<ledger::AuditEntry>& entries) {
  ordered_json out = ordered_json::array();
  for (const auto& e : entries) {
    out.push_back({{"seq", e.seq}, {"kind", e.kind}, {"party", e.party}, {"outcome", e.outcome}, {"id", to_hex(e.id)}});
  }
  return out;
}

void audit_text(std::ostream& out, const char* chain, const std::vector<ledger::AuditEntry>& entries) {
  for (const auto& e : entries) {
    out << "  " << std::left << std::setw(8) << chain << std::setw(4) << e.seq << std::setw(10) << e.kind
        << std::setw(10) << e.party << std::setw(9) << e.outcome << to_hex(e.id).substr(0, 16) << "\n";
  }
}

/// Fails the command with the refusal reason as the message.
void require_success(const protocol::Outcome& out, const char* what) {
  if (out.ok()) return;
  std::string where = out.failed_at ? std::string(" at ") + protocol::to_string(*out.failed_at) : "";
  const char* verb = out.kind == protocol::OutcomeKind::refusal ? "refused"
                     : out.kind == protocol::OutcomeKind::timeout ? "timed out"
                                                                   : "rejected";
  throw std::runtime_error(std::string(what) + " " + verb + where + ": " + out.reason);
}

// ---- commands ----

void cmd_setup(const CliConfig& config, const Options& opt, Report& r) {
  auto d = Deployment::create(config, opt.force, SystemRandom::instance());
  const auto& grp = *d.world().group();
  r.json = {{"data_dir", d.dir().string()},
            {"profile", grp.profile().name},
            {"chain_a_public_key", hex_of(grp, d.world().chain_a().system_public_key)},
            {"chain_b_public_key", hex_of(grp, d.world().chain_b().system_public_key)}};
  r.text << "deployment created in " << d.dir().string() << "\n"
         << "profile      " << grp.profile().name << "\n"
         << "chain A PK'  " << r.json["chain_a_public_key"].get<std::string>().substr(0, 32) << "...\n"
         << "chain B PK'  " << r.json["chain_b_public_key"].get<std::string>().substr(0, 32) << "...\n"
         << "both chains registered with the relay\n";
}

void cmd_keygen(const CliConfig& config, const Options& opt, const std::string& role, const std::string& id,
                Report& r) {
  auto d = Deployment::open(config, SystemRandom::instance());
  const auto& grp = *d.world().group();
  r.json = {{"role", role}, {"id", id}};
  if (role == "owner") {
    auto keys = d.keygen_owner(id, opt.force);
    r.json["pk_do"] = hex_of(grp, keys.pk_do);
    if (opt.reveal_secrets) r.json["sk_do_sanitized"] = hex_of(grp, keys.sk_do_sanitized);
  } else if (role == "user") {
    auto keys = d.keygen_user(id, opt.force);
    r.json["pk_du1"] = hex_of(grp, keys.pk.pk1);
    r.json["pk_du2"] = hex_of(grp, keys.pk.pk2);
    if (opt.reveal_secrets) {
      r.json["sk_du"] = hex_of(grp, keys.sk_du);
      r.json["user_secret"] = to_hex(grp.serialize(keys.user_secret));
    }
  } else {
    throw Error(Errc::invalid_argument, "role must be 'owner' or 'user'");
  }
  d.save();
  r.text << role << " '" << id << "' provisioned\n";
  for (const auto& [k, v] : r.json.items()) {
    if (k != "role" && k != "id") r.text << "  " << std::left << std::setw(16) << k << v.get<std::string>() << "\n";
  }
  if (!opt.reveal_secrets) r.text << "  (secret keys written to " << (d.dir() / "keys").string() << ")\n";
}

void cmd_encrypt(const CliConfig& config, const std::string& file, const std::string& owner, Report& r) {
  auto d = Deployment::open(config, SystemRandom::instance());
  d.require_owner(owner);
  auto phr = read_input(file);
  auto up = d.world().upload(owner, phr);
  d.record_upload(up.data1, owner);
  d.save();
  r.json = {{"owner", owner}, {"file", file}, {"bytes", phr.size()}, {"data1", to_hex(up.data1)}};
  r.text << "stored " << phr.size() << " bytes for '" << owner << "' on chain A\n"
         << "Data_1 " << to_hex(up.data1) << "\n";
}

void cmd_share(const CliConfig& config, const std::string& data1_hex, const std::string& user, Report& r) {
  auto d = Deployment::open(config, SystemRandom::instance());
  auto data1 = parse_digest(data1_hex, "Data_1");
  d.require_user(user);
  auto owner = d.owner_of(data1);
  if (!owner) {
    throw Error(Errc::not_found, std::string(ledger::kTargetMissing) + "; run `medexchain encrypt` first");
  }
  auto out = d.world().share(*owner, user, data1);
  d.save();
  require_success(out, "share");
  d.record_share(*out.data2, {*owner, user, data1});
  r.json = {{"owner", *owner}, {"user", user}, {"data1", data1_hex}, {"data2", to_hex(*out.data2)}};
  r.text << "shared with '" << user << "' (M1..M6 verified)\nData_2 " << to_hex(*out.data2) << "\n";
}

void cmd_fetch(const CliConfig& config, const std::string& data2_hex, Report& r) {
  auto d = Deployment::open(config, SystemRandom::instance());
  auto data2 = parse_digest(data2_hex, "Data_2");
  auto entry = d.share_of(data2);
  if (!entry) throw Error(Errc::not_found, "unknown Data_2; run `medexchain share` first");
  auto out = d.world().fetch(entry->owner, entry->user, data2);
  d.save();
  require_success(out, "fetch");
  ordered_json stored = {{"ciphertext", to_hex(scheme::encode_wire(*out.reciphertext))}};
  if (out.dem_payload) stored["payload"] = to_hex(*out.dem_payload);
  auto path = d.inbox_path(entry->user, data2);
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::trunc) << stored.dump(2) << "\n";
  r.json = {{"user", entry->user}, {"data2", data2_hex}, {"path", path.string()}};
  r.text << "fetched C_DU for '" << entry->user << "' (M7..M8 verified)\nsaved " << path.string() << "\n";
}

void cmd_decrypt(const CliConfig& config, const std::string& data2_hex, const std::string& out_path, Report& r) {
  auto d = Deployment::open(config, SystemRandom::instance());
  auto data2 = parse_digest(data2_hex, "Data_2");
  auto entry = d.share_of(data2);
  if (!entry) throw Error(Errc::not_found, "unknown Data_2; run `medexchain share` first");
  auto path = d.inbox_path(entry->user, data2);
  if (!fs::exists(path)) throw Error(Errc::not_found, "no fetched ciphertext; run `medexchain fetch " + data2_hex + "` first");
  std::ifstream in(path);
  auto stored = nlohmann::json::parse(in);
  const auto& grp = d.world().group();
  auto ct = scheme::decode_reciphertext(grp, from_hex(stored.at("ciphertext").get<std::string>()));
  std::optional<Bytes> payload;
  if (stored.contains("payload")) payload = from_hex(stored.at("payload").get<std::string>());
  auto plain = scheme::dec_message(ct, d.world().user(entry->user).sk_du, payload);
  r.json = {{"user", entry->user}, {"data2", data2_hex}};
  if (plain.dem_payload) {
    r.json["bytes"] = plain.dem_payload->size();
    if (!out_path.empty()) {
      write_output(out_path, *plain.dem_payload);
      r.json["out"] = out_path;
      r.text << "wrote " << plain.dem_payload->size() << " bytes to " << out_path << "\n";
    } else {
      r.json["plaintext"] = printable(*plain.dem_payload);
      r.text << printable(*plain.dem_payload);
    }
  } else {
    r.json["message"] = to_hex(grp->serialize(plain.group_payload));
    r.text << "M " << r.json["message"].get<std::string>() << "\n";
  }
}

struct BenchOptions {
  std::string kind = "all";
  std::size_t repetitions = 50;
  std::size_t warmup = 5;
  std::size_t requests = 1000;
  std::size_t concurrency = 8;
  std::string out_dir;
  bool counters_only = false;
};

int cmd_bench(const CliConfig& config, const BenchOptions& b, Report& r) {
  if (b.kind != "stages" && b.kind != "sizes" && b.kind != "system" && b.kind != "all") {
    throw Error(Errc::invalid_argument, "bench kind must be stages, sizes, system or all");
  }
  auto profile = config.profile();
  bench::ReportBundle bundle;
  bool exact = true;
  auto& rng = SystemRandom::instance();

  if (b.kind == "stages" || b.kind == "all") {
    bundle.stages = bench::run_stage_bench({profile, b.repetitions, b.warmup}, rng);
    for (const auto& s : bundle.stages) exact = exact && s.counters_exact;
    if (!b.counters_only) {
      bundle.ratios = bench::run_ratio_checks(profile, b.repetitions, b.warmup, rng);
    }
    r.text << "stage       E1  E2  P   H   mean_us     median_us   exact\n";
    for (const auto& s : bundle.stages) {
      r.text << std::left << std::setw(12) << s.stage << std::setw(4) << s.counters.e1 << std::setw(4)
             << s.counters.e2 << std::setw(4) << s.counters.pairing << std::setw(4) << s.counters.hash
             << std::fixed << std::setprecision(1) << std::setw(12) << (b.counters_only ? 0.0 : s.mean_us)
             << std::setw(12) << (b.counters_only ? 0.0 : s.median_us) << (s.counters_exact ? "yes" : "NO") << "\n";
    }
    if (!b.counters_only) {
      auto prim = bench::run_primitive_bench(profile, b.repetitions, b.warmup, rng);
      r.text << std::setprecision(1) << "primitives  P " << prim.pairing_us << " us, H2 " << prim.hash_gt_us
             << " us, E1 " << prim.e1_us << " us, E2 " << prim.e2_us << " us (medians)\n";
    }
    for (const auto& c : bundle.ratios) {
      r.text << std::setprecision(2) << c.name << ": ratio " << c.ratio() << (c.within() ? " (within " : " (outside ")
             << static_cast<int>(c.tolerance * 100) << "%)\n";
    }
  }
  if (b.kind == "sizes" || b.kind == "all") {
    bundle.sizes = bench::run_size_report(profile, rng);
    const auto& s = *bundle.sizes;
    if (profile.g1_bytes() == 128) exact = exact && s.matches_reference();
    r.text << "profile     Key_DO  Key_DU  CT    RK    CT'   Total\n"
           << std::left << std::setw(12) << s.profile << std::setw(8) << s.key_do << std::setw(8) << s.key_du
           << std::setw(6) << s.ct << std::setw(6) << s.rk << std::setw(6) << s.ct_prime << s.total() << "\n"
           << "total " << s.total() << " bytes\n";
  }
  if (b.kind == "system" || b.kind == "all") {
    bench::SystemBenchConfig sc;
    sc.profile = profile;
    sc.request_count = b.requests;
    sc.concurrency = b.concurrency;
    sc.latency_ms = static_cast<int>(config.latency_ms);
    sc.max_access_count = config.max_access_count;
    auto s = bench::run_system_bench(sc);
    exact = exact && s.conserved() && s.plaintext_mismatches == 0;
    r.text << std::fixed << std::setprecision(1) << "system      " << s.request_count << " requests, concurrency "
           << s.concurrency << ", " << s.latency_ms << " ms/hop\n"
           << "  throughput " << s.throughput_rps << " req/s, p50 " << s.p50_ms << " ms, p95 " << s.p95_ms << " ms\n"
           << "  success " << s.tallies.success << ", refusal " << s.tallies.refusal << ", reject " << s.tallies.reject
           << ", timeout " << s.tallies.timeout << ", verified " << s.verified_plaintexts << "\n";
    bundle.system.push_back(std::move(s));
  }
  if (!b.out_dir.empty()) {
    bench::emit_report(bundle, b.out_dir, b.counters_only);
    r.text << "reports written to " << b.out_dir << "\n";
  }
  r.json = bench::to_json(bundle, b.counters_only);
  r.json["exact"] = exact;
  if (!exact) r.text << "FAILED: an exact count, size or conservation check did not hold\n";
  return exact ? 0 : 1;
}

int cmd_demo(const CliConfig& config, const Options& opt, const std::string& input, const std::string& out_path,
             Report& r) {
  auto phr = input.empty() ? Bytes(kSamplePhr.begin(), kSamplePhr.end()) : read_input(input);
  auto d = Deployment::create(config, opt.force, SystemRandom::instance());
  auto& world = d.world();
  d.keygen_owner("alice", opt.force);
  d.keygen_user("bob", opt.force);
  auto up = world.upload("alice", phr);
  d.record_upload(up.data1, "alice");
  auto out = world.orchestrate_share("alice", "bob", up.data1);
  d.save();
  require_success(out, "demo");
  d.record_share(*out.data2, {"alice", "bob", up.data1});

  const auto& recovered = out.plaintext->dem_payload;
  bool identical = recovered && *recovered == phr && out.plaintext->group_payload == up.message;
  if (recovered && !out_path.empty()) write_output(out_path, *recovered);

  ordered_json flow = ordered_json::array();
  for (auto k : out.verified) flow.push_back(protocol::to_string(k));
  auto audit_a = world.node_a().audit().query();
  auto audit_relay = world.relay().audit_query();
  r.json = {{"data_dir", d.dir().string()},
            {"profile", world.group()->profile().name},
            {"data1", to_hex(up.data1)},
            {"data2", to_hex(*out.data2)},
            {"verified", flow},
            {"identical", identical},
            {"recovered", recovered ? printable(*recovered) : ""},
            {"audit", {{"chain_a", audit_json(audit_a)}, {"relay", audit_json(audit_relay)}}}};
  if (!out_path.empty()) r.json["out"] = out_path;

  r.text << "deployment   " << d.dir().string() << " (" << world.group()->profile().name << ")\n"
         << "owner alice, user bob provisioned through both reverse firewalls\n"
         << "Data_1       " << to_hex(up.data1) << "\n"
         << "exchange     ";
  for (std::size_t i = 0; i < out.verified.size(); ++i) r.text << (i ? " " : "") << protocol::to_string(out.verified[i]);
  r.text << "\nData_2       " << to_hex(*out.data2) << "\n"
         << "recovered " << (recovered ? recovered->size() : 0) << " bytes:\n"
         << (recovered ? printable(*recovered) : "") << (recovered && !recovered->empty() && recovered->back() != '\n' ? "\n" : "")
         << "byte-identical to input: " << (identical ? "yes" : "NO") << "\n"
         << "audit trail\n";
  audit_text(r.text, "chain-a", audit_a);
  audit_text(r.text, "relay", audit_relay);
  return identical ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Cross-chain PHR sharing with proxy re-encryption and reverse firewalls", "medexchain"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_file, "key=value configuration file");
  app.add_option("--backend", opt.backend, "transparent or pairing")->check(CLI::IsMember({"transparent", "pairing"}));
  app.add_option("--data-dir", opt.data_dir, "data directory (env MEDEXCHAIN_DATA_DIR)");
  app.add_flag("--json", opt.json, "print results as JSON");
  app.add_flag("--force", opt.force, "replace existing artifacts");
  app.add_flag("--reveal-secrets", opt.reveal_secrets, "print secret key material");

  auto* setup = app.add_subcommand("setup", "generate both chains' masters and register them with the relay");

  std::string role, id;
  auto* keygen = app.add_subcommand("keygen", "provision a data owner or data user key");
  keygen->add_option("role", role, "owner or user")->required()->check(CLI::IsMember({"owner", "user"}));
  keygen->add_option("id", id, "identity")->required();

  std::string file, owner;
  auto* encrypt = app.add_subcommand("encrypt", "encrypt a PHR file and store it on chain A");
  encrypt->add_option("file", file, "PHR file")->required()->check(CLI::ExistingFile);
  encrypt->add_option("--owner", owner, "data owner id")->required();

  std::string data1, user;
  auto* share = app.add_subcommand("share", "run M1..M6 for a stored ciphertext");
  share->add_option("data1", data1, "Data_1 (hex)")->required();
  share->add_option("--user", user, "data user id")->required();

  std::string data2;
  auto* fetch = app.add_subcommand("fetch", "run M7..M8 and keep the re-encrypted ciphertext");
  fetch->add_option("data2", data2, "Data_2 (hex)")->required();

  std::string decrypt_out;
  auto* decrypt = app.add_subcommand("decrypt", "decrypt a fetched ciphertext");
  decrypt->add_option("data2", data2, "Data_2 (hex)")->required();
  decrypt->add_option("--out", decrypt_out, "write the PHR here instead of printing it");

  BenchOptions bopt;
  auto* bench_cmd = app.add_subcommand("bench", "operation counts, sizes and the concurrent system benchmark");
  bench_cmd->add_option("kind", bopt.kind, "stages, sizes, system or all")->check(CLI::IsMember({"stages", "sizes", "system", "all"}));
  bench_cmd->add_option("--reps", bopt.repetitions, "repetitions per stage")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", bopt.warmup, "discarded warm-up iterations");
  bench_cmd->add_option("--requests", bopt.requests, "system bench request count")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--concurrency", bopt.concurrency, "system bench worker threads")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bopt.out_dir, "directory for CSV and JSON reports");
  bench_cmd->add_flag("--counters-only", bopt.counters_only, "omit timings so reports are reproducible");

  std::string demo_input, demo_out;
  auto* demo = app.add_subcommand("demo", "provision two chains and share a sample PHR end to end");
  demo->add_option("--input", demo_input, "PHR file to share instead of the built-in sample")->check(CLI::ExistingFile);
  demo->add_option("--out", demo_out, "write the recovered PHR here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  Report report;
  int code = 0;
  try {
    CliConfig config;
    apply_env(config, env);
    if (!opt.config_file.empty()) apply_config_file(config, opt.config_file);
    if (!opt.backend.empty()) config.backend = group::backend_from_string(opt.backend);
    if (!opt.data_dir.empty()) config.data_dir = opt.data_dir;

    if (*setup) {
      cmd_setup(config, opt, report);
    } else if (*keygen) {
      cmd_keygen(config, opt, role, id, report);
    } else if (*encrypt) {
      cmd_encrypt(config, file, owner, report);
    } else if (*share) {
      cmd_share(config, data1, user, report);
    } else if (*fetch) {
      cmd_fetch(config, data2, report);
    } else if (*decrypt) {
      cmd_decrypt(config, data2, decrypt_out, report);
    } else if (*bench_cmd) {
      code = cmd_bench(config, bopt, report);
    } else if (*demo) {
      code = cmd_demo(config, opt, demo_input, demo_out, report);
    }
  } catch (const std::exception& e) {
    if (opt.json) {
      out << ordered_json{{"error", e.what()}}.dump(2) << "\n";
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (opt.json) {
    out << report.json.dump(2) << "\n";
  } else {
    out << report.text.str();
  }
  return code;
}

}  // namespace medexchain::cli
