#include <chrono>
#include <fstream>
#include <iterator>

#include "medexchain/digest.hpp"
#include "medexchain/ledger.hpp"

namespace medexchain::ledger {

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

ContentStore::ContentStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
  for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.size() != 64) continue;
    auto address = digest_from_hex(name);
    auto data = read_file(entry.path());
    if (sha256(data) != address) {
      throw Error(Errc::tamper_detected, "stored blob does not match its address: " + name);
    }
    blobs_.emplace(address, std::move(data));
  }
}

Address ContentStore::put(ByteView data) {
  auto address = sha256(data);
  std::lock_guard lock(mu_);
  auto [it, inserted] = blobs_.try_emplace(address, data.begin(), data.end());
  if (inserted && dir_) {
    auto path = *dir_ / to_hex(address);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::io, "cannot write " + path.string());
  }
  return address;
}

std::optional<Bytes> ContentStore::get(const Address& address) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(address);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

bool ContentStore::contains(const Address& address) const {
  std::lock_guard lock(mu_);
  return blobs_.count(address) != 0;
}

std::size_t ContentStore::size() const {
  std::lock_guard lock(mu_);
  return blobs_.size();
}

}  // namespace medexchain::ledger
