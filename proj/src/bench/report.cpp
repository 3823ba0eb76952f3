#include <fstream>
#include <iomanip>
#include <sstream>
#include <ostream>

#include "medexchain/bench.hpp"

namespace medexchain::bench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json counters_json(const OpCounters& c) {
  return {{"e1", c.e1}, {"e2", c.e2}, {"p", c.pairing}, {"h", c.hash}};
}

OpCounters counters_from(const json& j) {
  return {j.at("e1").get<std::uint64_t>(), j.at("e2").get<std::uint64_t>(),
          j.at("p").get<std::uint64_t>(), j.at("h").get<std::uint64_t>()};
}

std::string fixed(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  return out;
}

// Records a problem when `key` is missing from `obj` or has the wrong type.
template <class Pred>
void require(std::vector<std::string>& errors, const json& obj, const std::string& where,
             const char* key, Pred&& pred, const char* type) {
  if (!obj.is_object() || !obj.contains(key)) {
    errors.push_back(where + ": missing \"" + key + "\"");
  } else if (!pred(obj.at(key))) {
    errors.push_back(where + ": \"" + key + "\" must be " + type);
  }
}

bool is_count(const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0); }
bool is_real(const json& j) { return j.is_number(); }
bool is_text(const json& j) { return j.is_string(); }
bool is_flag(const json& j) { return j.is_boolean(); }

}  // namespace

void write_stage_csv(std::ostream& out, const std::vector<StageReport>& reports, bool counters_only) {
  out << kStageCsvHeader << '\n';
  for (const auto& r : reports) {
    out << r.stage << ',' << r.counters.e1 << ',' << r.counters.e2 << ',' << r.counters.pairing << ','
        << r.counters.hash << ',' << (counters_only ? fixed(0) : fixed(r.mean_us)) << ','
        << (counters_only ? fixed(0) : fixed(r.median_us)) << ',' << r.backend << '\n';
  }
}

void write_size_csv(std::ostream& out, const SizeReport& r) {
  out << "profile,key_do,key_du,ct,rk,ct_prime,total\n";
  out << r.profile << ',' << r.key_do << ',' << r.key_du << ',' << r.ct << ',' << r.rk << ','
      << r.ct_prime << ',' << r.total() << '\n';
}

void write_system_csv(std::ostream& out, const std::vector<SystemRunReport>& reports) {
  out << "request_count,concurrency,latency_ms,backend,throughput_rps,p50_ms,p95_ms,success,refusal,"
         "reject,timeout,verified\n";
  for (const auto& r : reports) {
    out << r.request_count << ',' << r.concurrency << ',' << r.latency_ms << ',' << r.backend << ','
        << fixed(r.throughput_rps) << ',' << fixed(r.p50_ms) << ',' << fixed(r.p95_ms) << ','
        << r.tallies.success << ',' << r.tallies.refusal << ',' << r.tallies.reject << ','
        << r.tallies.timeout << ',' << r.verified_plaintexts << '\n';
  }
}

ordered_json to_json(const StageReport& r, bool counters_only) {
  return {{"stage", r.stage},
          {"counters", counters_json(r.counters)},
          {"counters_exact", r.counters_exact},
          {"repetitions", r.repetitions},
          {"mean_us", counters_only ? 0.0 : r.mean_us},
          {"median_us", counters_only ? 0.0 : r.median_us},
          {"backend", r.backend}};
}

ordered_json to_json(const SizeReport& r) {
  return {{"profile", r.profile}, {"key_do", r.key_do},     {"key_du", r.key_du},
          {"ct", r.ct},           {"rk", r.rk},             {"ct_prime", r.ct_prime},
          {"total", r.total()},   {"matches_reference", r.matches_reference()}};
}

ordered_json to_json(const SystemRunReport& r) {
  return {{"request_count", r.request_count},
          {"concurrency", r.concurrency},
          {"latency_ms", r.latency_ms},
          {"backend", r.backend},
          {"wall_seconds", r.wall_seconds},
          {"throughput_rps", r.throughput_rps},
          {"p50_ms", r.p50_ms},
          {"p95_ms", r.p95_ms},
          {"tallies",
           {{"success", r.tallies.success},
            {"refusal", r.tallies.refusal},
            {"reject", r.tallies.reject},
            {"timeout", r.tallies.timeout}}},
          {"verified_plaintexts", r.verified_plaintexts},
          {"plaintext_mismatches", r.plaintext_mismatches}};
}

ordered_json to_json(const std::vector<RatioCheck>& checks) {
  ordered_json out = ordered_json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"measured_us", c.measured_us},
                   {"reference_us", c.reference_us},
                   {"tolerance", c.tolerance},
                   {"ratio", c.ratio()},
                   {"within", c.within()}});
  }
  return out;
}

StageReport stage_report_from_json(const json& j) {
  StageReport r;
  r.stage = j.at("stage").get<std::string>();
  r.counters = counters_from(j.at("counters"));
  r.counters_exact = j.at("counters_exact").get<bool>();
  r.repetitions = j.at("repetitions").get<std::size_t>();
  r.mean_us = j.at("mean_us").get<double>();
  r.median_us = j.at("median_us").get<double>();
  r.backend = j.at("backend").get<std::string>();
  return r;
}

SizeReport size_report_from_json(const json& j) {
  SizeReport r;
  r.profile = j.at("profile").get<std::string>();
  r.key_do = j.at("key_do").get<std::size_t>();
  r.key_du = j.at("key_du").get<std::size_t>();
  r.ct = j.at("ct").get<std::size_t>();
  r.rk = j.at("rk").get<std::size_t>();
  r.ct_prime = j.at("ct_prime").get<std::size_t>();
  if (j.at("total").get<std::size_t>() != r.total()) {
    throw Error(Errc::malformed_encoding, "size report total does not match its rows");
  }
  return r;
}

SystemRunReport system_report_from_json(const json& j) {
  SystemRunReport r;
  r.request_count = j.at("request_count").get<std::size_t>();
  r.concurrency = j.at("concurrency").get<std::size_t>();
  r.latency_ms = j.at("latency_ms").get<int>();
  r.backend = j.at("backend").get<std::string>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.throughput_rps = j.at("throughput_rps").get<double>();
  r.p50_ms = j.at("p50_ms").get<double>();
  r.p95_ms = j.at("p95_ms").get<double>();
  const auto& t = j.at("tallies");
  r.tallies = {t.at("success").get<std::size_t>(), t.at("refusal").get<std::size_t>(),
               t.at("reject").get<std::size_t>(), t.at("timeout").get<std::size_t>()};
  r.verified_plaintexts = j.at("verified_plaintexts").get<std::size_t>();
  r.plaintext_mismatches = j.at("plaintext_mismatches").get<std::size_t>();
  return r;
}

ordered_json to_json(const ReportBundle& bundle, bool counters_only) {
  ordered_json out;
  out["schema"] = kReportSchema;
  if (!bundle.stages.empty()) {
    auto& stages = out["stages"] = ordered_json::array();
    for (const auto& s : bundle.stages) stages.push_back(to_json(s, counters_only));
  }
  if (bundle.sizes) out["sizes"] = to_json(*bundle.sizes);
  if (!bundle.system.empty()) {
    auto& system = out["system"] = ordered_json::array();
    for (const auto& s : bundle.system) system.push_back(to_json(s));
  }
  if (!bundle.ratios.empty() && !counters_only) out["ratios"] = to_json(bundle.ratios);
  return out;
}

ReportBundle bundle_from_json(const json& j) {
  auto errors = validate_report(j);
  if (!errors.empty()) throw Error(Errc::malformed_encoding, "invalid report: " + errors.front());
  ReportBundle bundle;
  if (j.contains("stages")) {
    for (const auto& s : j.at("stages")) bundle.stages.push_back(stage_report_from_json(s));
  }
  if (j.contains("sizes")) bundle.sizes = size_report_from_json(j.at("sizes"));
  if (j.contains("system")) {
    for (const auto& s : j.at("system")) bundle.system.push_back(system_report_from_json(s));
  }
  if (j.contains("ratios")) {
    for (const auto& c : j.at("ratios")) {
      bundle.ratios.push_back({c.at("name").get<std::string>(), c.at("measured_us").get<double>(),
                               c.at("reference_us").get<double>(), c.at("tolerance").get<double>()});
    }
  }
  return bundle;
}

std::vector<std::string> validate_report(const json& j) {
  std::vector<std::string> errors;
  if (!j.is_object()) return {"report must be a JSON object"};
  if (!j.contains("schema") || j.at("schema") != kReportSchema) {
    errors.push_back("schema must be \"" + std::string(kReportSchema) + "\"");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "schema" && key != "stages" && key != "sizes" && key != "system" && key != "ratios") {
      errors.push_back("unknown section \"" + key + "\"");
    }
  }

  if (j.contains("stages")) {
    if (!j.at("stages").is_array()) {
      errors.push_back("stages must be an array");
    } else {
      std::size_t i = 0;
      for (const auto& s : j.at("stages")) {
        auto where = "stages[" + std::to_string(i++) + "]";
        require(errors, s, where, "stage", is_text, "a string");
        require(errors, s, where, "counters", [](const json& c) { return c.is_object(); }, "an object");
        if (s.is_object() && s.contains("counters") && s.at("counters").is_object()) {
          for (const char* k : {"e1", "e2", "p", "h"}) require(errors, s.at("counters"), where + ".counters", k, is_count, "a count");
        }
        require(errors, s, where, "counters_exact", is_flag, "a boolean");
        require(errors, s, where, "repetitions", is_count, "a count");
        require(errors, s, where, "mean_us", is_real, "a number");
        require(errors, s, where, "median_us", is_real, "a number");
        require(errors, s, where, "backend", is_text, "a string");
      }
    }
  }

  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    require(errors, s, "sizes", "profile", is_text, "a string");
    for (const char* k : {"key_do", "key_du", "ct", "rk", "ct_prime", "total"}) require(errors, s, "sizes", k, is_count, "a count");
    require(errors, s, "sizes", "matches_reference", is_flag, "a boolean");
    if (errors.empty()) {
      std::size_t sum = 0;
      for (const char* k : {"key_do", "key_du", "ct", "rk", "ct_prime"}) sum += s.at(k).get<std::size_t>();
      if (sum != s.at("total").get<std::size_t>()) errors.push_back("sizes: total does not match its rows");
    }
  }

  if (j.contains("system")) {
    if (!j.at("system").is_array()) {
      errors.push_back("system must be an array");
    } else {
      std::size_t i = 0;
      for (const auto& s : j.at("system")) {
        auto where = "system[" + std::to_string(i++) + "]";
        for (const char* k : {"request_count", "concurrency", "verified_plaintexts", "plaintext_mismatches"}) {
          require(errors, s, where, k, is_count, "a count");
        }
        require(errors, s, where, "latency_ms", is_count, "a count");
        require(errors, s, where, "backend", is_text, "a string");
        for (const char* k : {"wall_seconds", "throughput_rps", "p50_ms", "p95_ms"}) require(errors, s, where, k, is_real, "a number");
        require(errors, s, where, "tallies", [](const json& t) { return t.is_object(); }, "an object");
        if (s.is_object() && s.contains("tallies") && s.at("tallies").is_object()) {
          const auto& t = s.at("tallies");
          bool complete = true;
          for (const char* k : {"success", "refusal", "reject", "timeout"}) {
            auto before = errors.size();
            require(errors, t, where + ".tallies", k, is_count, "a count");
            complete = complete && errors.size() == before;
          }
          if (complete && s.contains("request_count") && is_count(s.at("request_count"))) {
            auto total = t.at("success").get<std::size_t>() + t.at("refusal").get<std::size_t>() +
                         t.at("reject").get<std::size_t>() + t.at("timeout").get<std::size_t>();
            if (total != s.at("request_count").get<std::size_t>()) {
              errors.push_back(where + ": tallies do not add up to request_count");
            }
          }
        }
      }
    }
  }

  if (j.contains("ratios")) {
    if (!j.at("ratios").is_array()) {
      errors.push_back("ratios must be an array");
    } else {
      std::size_t i = 0;
      for (const auto& c : j.at("ratios")) {
        auto where = "ratios[" + std::to_string(i++) + "]";
        require(errors, c, where, "name", is_text, "a string");
        for (const char* k : {"measured_us", "reference_us", "tolerance", "ratio"}) require(errors, c, where, k, is_real, "a number");
        require(errors, c, where, "within", is_flag, "a boolean");
      }
    }
  }
  return errors;
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir, bool counters_only) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  if (!bundle.stages.empty()) {
    auto out = open_for_write(dir / "stages.csv");
    write_stage_csv(out, bundle.stages, counters_only);
  }
  if (bundle.sizes) {
    auto out = open_for_write(dir / "sizes.csv");
    write_size_csv(out, *bundle.sizes);
  }
  if (!bundle.system.empty()) {
    auto out = open_for_write(dir / "system.csv");
    write_system_csv(out, bundle.system);
  }
  auto out = open_for_write(dir / "report.json");
  out << to_json(bundle, counters_only).dump(2) << '\n';
  if (!out) throw Error(Errc::io, "cannot write " + (dir / "report.json").string());
}

}  // namespace medexchain::bench
