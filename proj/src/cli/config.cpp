#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "medexchain/cli.hpp"

namespace medexchain::cli {

namespace {

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size()) {
    throw Error(Errc::invalid_argument, "config: " + std::string(key) + " expects a number, got '" +
                                            std::string(value) + "'");
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

group::GroupProfile CliConfig::profile() const {
  if (profile_path) {
    std::ifstream in(*profile_path);
    if (!in) throw Error(Errc::io, "cannot read profile descriptor " + profile_path->string());
    std::ostringstream text;
    text << in.rdbuf();
    return group::parse_descriptor(text.str());
  }
  if (backend == group::BackendKind::transparent) return group::GroupProfile::transparent_80();
  return group::GroupProfile::type_a_80();
}

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

void apply_config_text(CliConfig& config, std::string_view text, const std::filesystem::path& base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "profile") {
      config.profile_path = resolve(base, value);
    } else if (key == "data_dir") {
      config.data_dir = resolve(base, value);
    } else if (key == "max_access_count") {
      config.max_access_count = parse_number<std::size_t>(key, value);
    } else if (key == "freshness_window_ms") {
      config.freshness_window_ms = parse_number<std::int64_t>(key, value);
    } else if (key == "latency_ms") {
      config.latency_ms = parse_number<std::int64_t>(key, value);
    } else if (key == "backend") {
      config.backend = group::backend_from_string(value);
    } else {
      throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + ": unknown key '" +
                                              std::string(key) + "'");
    }
  }
}

void apply_config_file(CliConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(config, text.str(), path.parent_path());
}

void apply_env(CliConfig& config, const EnvLookup& env) {
  if (auto dir = env(kDataDirEnv)) config.data_dir = *dir;
}

}  // namespace medexchain::cli
