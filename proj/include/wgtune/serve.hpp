#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wgtune/features.hpp"
#include "wgtune/learn.hpp"
#include "wgtune/tuner.hpp"

namespace wgtune {

// A trained model plus the selection state the daemon needs: fallback choice
// and safe ranking for classifiers, prior-known refused sizes for both kinds.
struct TunerBundle {
  enum class Kind { Classifier, Regressor };

  Kind kind = Kind::Regressor;
  std::unique_ptr<Classifier> classifier;
  FallbackKind fallback = FallbackKind::NearestNeighbour;
  std::vector<WorkgroupSize> baseline_ranking;
  std::unique_ptr<Regressor> regressor;
  std::set<WorkgroupSize> prior_refused;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TunerBundle from_json(const nlohmann::json& j);
};

// Per-connection daemon state: the scenario of the last predict request and
// the refusals reported within this session.
struct Session {
  bool active = false;
  FeatureVector features;
  int max_wgsize = 0;
  std::set<WorkgroupSize> refused;
};

// Handles one newline-delimited JSON request, returning the response
// document. Malformed input yields {"type":"error",...} without touching the
// session.
nlohmann::json handle_request(const TunerBundle& bundle, Session& session,
                              const std::string& line);

// Newline-delimited JSON prediction daemon on localhost TCP. Connections are
// served concurrently; the bundle is shared read-only; sessions are
// connection-local.
class PredictionServer {
 public:
  // Binds immediately; port 0 picks a free port. Throws IoError on failure.
  PredictionServer(const TunerBundle& bundle, std::uint16_t port);
  ~PredictionServer();

  PredictionServer(const PredictionServer&) = delete;
  PredictionServer& operator=(const PredictionServer&) = delete;

  std::uint16_t port() const { return port_; }

  void start();          // accept loop on a background thread
  void serve_forever();  // accept loop on this thread; returns after stop()
  void stop();

 private:
  void accept_loop();
  void handle_connection(int fd);

  const TunerBundle& bundle_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread accept_thread_;
  std::vector<std::thread> connections_;
  std::vector<int> open_fds_;
  std::mutex mutex_;
  bool stopping_ = false;
};

}  // namespace wgtune
