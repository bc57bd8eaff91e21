#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ontoalign/error.hpp"
#include "ontoalign/scoring.hpp"

namespace ontoalign {

struct RemoteClassifierScorer::Endpoint {
  std::string scheme_host_port;
  std::string base_path;
};

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

// Splits "http://host:port/prefix" into the client address and path prefix.
RemoteClassifierScorer::Endpoint parse_endpoint(const std::string& url) {
  if (url.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::config, "scorer endpoint must be an http:// URL, got '" + url + "'");
  }
  auto slash = url.find('/', 7);
  RemoteClassifierScorer::Endpoint ep;
  ep.scheme_host_port = url.substr(0, slash);
  ep.base_path = slash == std::string::npos ? "" : url.substr(slash);
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  if (ep.scheme_host_port.size() <= 7) throw Error(ErrorCode::config, "scorer endpoint has no host: '" + url + "'");
  return ep;
}

}  // namespace

RemoteClassifierScorer::RemoteClassifierScorer(RemoteScorerOptions options)
    : options_(std::move(options)),
      endpoint_(std::make_unique<Endpoint>(parse_endpoint(options_.endpoint))),
      in_flight_(std::clamp(options_.max_in_flight, 1, 1024)) {
  if (options_.max_attempts < 1) options_.max_attempts = 1;
}

RemoteClassifierScorer::~RemoteClassifierScorer() = default;

std::vector<double> RemoteClassifierScorer::score_batch(std::span<const LabelPair> pairs) const {
  nlohmann::json body;
  auto& arr = body["pairs"] = nlohmann::json::array();
  for (const auto& [l, r] : pairs) arr.push_back({l, r});
  const std::string payload = body.dump();

  auto backoff = options_.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Result res;
    {
      SlotGuard slot(in_flight_);
      httplib::Client client(endpoint_->scheme_host_port);
      const auto secs = options_.timeout.count() / 1000;
      const auto usecs = (options_.timeout.count() % 1000) * 1000;
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      res = client.Post(endpoint_->base_path + "/score", payload, "application/json");
    }
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_failure = "server status " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw Error(ErrorCode::scorer_protocol, "scorer rejected request with status " + std::to_string(res->status) +
                                                  ": " + res->body);
    } else {
      nlohmann::json reply;
      try {
        reply = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::scorer_protocol, std::string("scorer response is not JSON: ") + e.what());
      }
      if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
        throw Error(ErrorCode::scorer_protocol, "scorer response lacks a \"scores\" array");
      }
      const auto& scores = reply["scores"];
      if (scores.size() != pairs.size()) {
        throw Error(ErrorCode::scorer_protocol, "scorer returned " + std::to_string(scores.size()) + " scores for " +
                                                    std::to_string(pairs.size()) + " pairs");
      }
      std::vector<double> out;
      out.reserve(scores.size());
      for (const auto& s : scores) {
        if (!s.is_number()) throw Error(ErrorCode::scorer_protocol, "non-numeric score in scorer response");
        double v = s.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::scorer_protocol, "scorer returned a score outside [0,1]");
        out.push_back(v);
      }
      return out;
    }
    if (attempt < options_.max_attempts) {
      spdlog::debug("scorer attempt {} failed ({}), retrying", attempt, last_failure);
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorCode::scorer_transport, "scorer at " + options_.endpoint + " failed after " +
                                               std::to_string(options_.max_attempts) + " attempts: " + last_failure);
}

RemoteClassifierScorer::Health RemoteClassifierScorer::health() const {
  httplib::Client client(endpoint_->scheme_host_port);
  const auto secs = options_.timeout.count() / 1000;
  client.set_connection_timeout(secs, (options_.timeout.count() % 1000) * 1000);
  auto res = client.Get(endpoint_->base_path + "/health");
  if (!res) throw Error(ErrorCode::scorer_transport, "health check failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::scorer_transport, "health check returned status " + std::to_string(res->status));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    return {reply.at("status").get<std::string>(), reply.value("model", std::string())};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::scorer_protocol, std::string("malformed health response: ") + e.what());
  }
}

}  // namespace ontoalign
