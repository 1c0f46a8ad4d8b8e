#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "enrich/enrichment.hpp"
#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/text.hpp"

namespace enrich {

using nlohmann::json;

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

HttpGet make_http_get(std::chrono::milliseconds timeout) {
  return [timeout](const std::string& url) -> HttpResult {
    // Split "scheme://host[:port]" from the path for httplib::Client.
    auto scheme_end = url.find("://");
    std::size_t path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    try {
      httplib::Client client(origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      auto res = client.Get(path);
      if (!res) return {};
      return {res->status, res->body};
    } catch (const std::exception&) {
      return {};
    }
  };
}

RemoteEthnicityProvider::RemoteEthnicityProvider(std::string url_template, HttpGet get,
                                                 std::optional<std::filesystem::path> cache_path,
                                                 std::size_t max_in_flight, double cutoff)
    : url_template_(std::move(url_template)),
      get_(std::move(get)),
      cache_path_(std::move(cache_path)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      cutoff_(cutoff) {
  if (url_template_.find("{name}") == std::string::npos) {
    throw ValidationError("ethnicity URL template must contain {name}");
  }
  if (!cache_path_ || !std::filesystem::exists(*cache_path_)) return;
  // A torn last line (interrupted run) is skipped rather than fatal.
  std::string content = io::read_file(*cache_path_);
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    std::string line = content.substr(start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? content.size() : end + 1;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      cache_[j.at("name_hash").get<std::string>()] =
          parse_ethnicity_path(j.at("path").get<std::string>(), j.at("confidence").get<double>());
    } catch (const std::exception&) {
    }
  }
}

std::optional<EthnicityPath> RemoteEthnicityProvider::cached(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = cache_.find(hash);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

void RemoteEthnicityProvider::store(const std::string& hash, const EthnicityPath& path) {
  std::lock_guard lock(mu_);
  if (!cache_.emplace(hash, path).second) return;
  if (cache_path_) {
    io::append_line(*cache_path_,
                    json{{"name_hash", hash}, {"path", path.joined()}, {"confidence", path.confidence}}.dump());
  }
}

std::optional<EthnicityPath> RemoteEthnicityProvider::fetch(const std::string& name) {
  std::string url = url_template_;
  url.replace(url.find("{name}"), 6, url_encode(name));
  HttpResult res;
  try {
    res = get_(url);
  } catch (const std::exception&) {
    res = {};
  }
  {
    std::lock_guard lock(mu_);
    ++requests_;
  }
  if (res.status != 200) {
    std::lock_guard lock(mu_);
    failures_.push_back(name);
    return std::nullopt;
  }
  try {
    return ethnicity_from_response(json::parse(res.body), cutoff_);
  } catch (const json::exception&) {
    std::lock_guard lock(mu_);
    failures_.push_back(name);
    return std::nullopt;
  }
}

EthnicityPath RemoteEthnicityProvider::lookup(const std::string& normalized_name) {
  if (normalized_name.empty()) return EthnicityPath{};
  const std::string hash = text::sha256_hex(normalized_name);
  if (auto hit = cached(hash)) return *hit;
  // Failures are not cached so a later run can retry them.
  auto p = fetch(normalized_name);
  if (!p) return EthnicityPath{};
  store(hash, *p);
  return *p;
}

std::vector<EthnicityPath> RemoteEthnicityProvider::lookup_many(std::span<const std::string> normalized_names) {
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& n : normalized_names) {
    if (slot.emplace(n, unique.size()).second) unique.push_back(n);
  }
  std::vector<EthnicityPath> results(unique.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < unique.size(); i = next++) results[i] = lookup(unique[i]);
  };
  const std::size_t n_threads = std::min(max_in_flight_, unique.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<EthnicityPath> out;
  out.reserve(normalized_names.size());
  for (const auto& n : normalized_names) out.push_back(results[slot.at(n)]);
  return out;
}

std::size_t RemoteEthnicityProvider::requests_made() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::string> RemoteEthnicityProvider::failures() const {
  std::lock_guard lock(mu_);
  return failures_;
}

}  // namespace enrich
