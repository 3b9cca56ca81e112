#include "wgtune/serve.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <mutex>

#include "wgtune/datastore.hpp"
#include "wgtune/errors.hpp"
#include "wgtune/scenario.hpp"

namespace wgtune {

using nlohmann::json;

namespace {

json sizes_to_json(const std::set<WorkgroupSize>& sizes) {
  json out = json::array();
  for (const auto& w : sizes) out.push_back(json::array({w.cols(), w.rows()}));
  return out;
}

json sizes_to_json(const std::vector<WorkgroupSize>& sizes) {
  json out = json::array();
  for (const auto& w : sizes) out.push_back(json::array({w.cols(), w.rows()}));
  return out;
}

WorkgroupSize size_from_json(const json& j) {
  return WorkgroupSize(j.at(0).get<int>(), j.at(1).get<int>());
}

json error_response(const std::string& message) {
  return json{{"type", "error"}, {"message", message}};
}

// Selects the next proposal for the session: the tuner runs against a probe
// that refuses exactly the sizes this session has seen refused. Real
// legality feedback comes from the client as follow-up "refused" messages.
json propose(const TunerBundle& bundle, const Session& session) {
  std::set<WorkgroupSize> known;
  for (const auto& w : session.refused) {
    if (w.area() <= session.max_wgsize) known.insert(w);
  }
  ConstraintContext ctx(session.max_wgsize, session.max_wgsize, known);
  ProbeFn probe = [&](WorkgroupSize w) {
    return session.refused.count(w) ? ProbeResult::Refused : ProbeResult::Legal;
  };

  WorkgroupSize w;
  if (bundle.kind == TunerBundle::Kind::Classifier) {
    FallbackStrategy strategy;
    switch (bundle.fallback) {
      case FallbackKind::Baseline:
        strategy = FallbackStrategy::baseline(bundle.baseline_ranking);
        break;
      case FallbackKind::Random:
        strategy = FallbackStrategy::random(bundle.seed);
        break;
      case FallbackKind::NearestNeighbour:
        strategy = FallbackStrategy::nearest_neighbour();
        break;
    }
    w = tune_classify(*bundle.classifier, session.features, ctx, strategy, probe).w;
  } else {
    FitnessMode mode = bundle.regressor->mode() == RegressionMode::Runtime
                           ? FitnessMode::RuntimeReciprocal
                           : FitnessMode::Speedup;
    w = tune_regress(*bundle.regressor, session.features, ctx, mode, probe).w;
  }
  return json{{"type", "wgsize"}, {"w_c", w.cols()}, {"w_r", w.rows()}};
}

}  // namespace

json TunerBundle::to_json() const {
  json j;
  j["seed"] = seed;
  j["prior_refused"] = sizes_to_json(prior_refused);
  if (kind == Kind::Classifier) {
    j["type"] = "classifier";
    j["fallback"] = to_string(fallback);
    if (fallback == FallbackKind::Baseline) {
      j["baseline_ranking"] = sizes_to_json(baseline_ranking);
    }
    j["model"] = classifier->to_json();
  } else {
    j["type"] = "regressor";
    j["model"] = regressor->to_json();
  }
  return j;
}

TunerBundle TunerBundle::from_json(const json& j) {
  TunerBundle bundle;
  bundle.seed = j.value("seed", std::uint64_t{0});
  for (const auto& w : j.value("prior_refused", json::array())) {
    bundle.prior_refused.insert(size_from_json(w));
  }
  auto type = j.at("type").get<std::string>();
  if (type == "classifier") {
    bundle.kind = Kind::Classifier;
    bundle.fallback = fallback_kind_from_string(j.at("fallback").get<std::string>());
    if (bundle.fallback == FallbackKind::Baseline) {
      for (const auto& w : j.at("baseline_ranking")) {
        bundle.baseline_ranking.push_back(size_from_json(w));
      }
    }
    bundle.classifier = classifier_from_json(j.at("model"));
  } else if (type == "regressor") {
    bundle.kind = Kind::Regressor;
    bundle.regressor = regressor_from_json(j.at("model"));
  } else {
    throw ParseError("unknown model bundle type '" + type + "'");
  }
  return bundle;
}

json handle_request(const TunerBundle& bundle, Session& session, const std::string& line) {
  json request = json::parse(line, nullptr, false);
  if (request.is_discarded() || !request.is_object()) {
    return error_response("malformed JSON request");
  }
  try {
    auto type = request.value("type", "");
    if (type == "predict") {
      const auto& scenario_json = request.at("scenario");
      Scenario s = make_scenario(device_from_json(scenario_json.at("device")),
                                 kernel_from_json(scenario_json.at("kernel")),
                                 dataset_from_json(scenario_json.at("dataset")));
      Session fresh;
      fresh.features = extract(s);
      fresh.max_wgsize = request.at("max_wgsize").get<int>();
      if (fresh.max_wgsize < 1) {
        return error_response("max_wgsize must be positive");
      }
      for (const auto& w : bundle.prior_refused) fresh.refused.insert(w);
      for (const auto& w : request.value("refused", json::array())) {
        fresh.refused.insert(size_from_json(w));
      }
      fresh.active = true;
      json response = propose(bundle, fresh);
      session = std::move(fresh);  // committed only once the proposal exists
      return response;
    }
    if (type == "refused") {
      if (!session.active) {
        return error_response("no active prediction in this session");
      }
      session.refused.insert(WorkgroupSize(request.at("w_c").get<int>(),
                                           request.at("w_r").get<int>()));
      return propose(bundle, session);
    }
    return error_response("unknown request type '" + type + "'");
  } catch (const json::exception& e) {
    return error_response(std::string("bad request: ") + e.what());
  } catch (const Error& e) {
    return error_response(e.what());
  }
}

PredictionServer::PredictionServer(const TunerBundle& bundle, std::uint16_t port)
    : bundle_(bundle) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw IoError("socket() failed");
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw IoError("cannot bind 127.0.0.1:" + std::to_string(port) + ": " +
                  std::strerror(errno));
  }
  if (::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw IoError("listen() failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

PredictionServer::~PredictionServer() { stop(); }

void PredictionServer::start() {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void PredictionServer::serve_forever() { accept_loop(); }

void PredictionServer::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> pending;
  {
    std::lock_guard lock(mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    pending.swap(connections_);
  }
  for (auto& t : pending) {
    if (t.joinable()) t.join();
  }
}

void PredictionServer::accept_loop() {
  while (true) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;  // listener closed by stop()
    std::lock_guard lock(mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    connections_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void PredictionServer::handle_connection(int fd) {
  Session session;
  std::string buffer;
  char chunk[4096];
  while (true) {
    auto newline = buffer.find('\n');
    if (newline == std::string::npos) {
      ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    std::string line = buffer.substr(0, newline);
    buffer.erase(0, newline + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string response;
    try {
      response = handle_request(bundle_, session, line).dump();
    } catch (const std::exception& e) {
      response = error_response(e.what()).dump();
    }
    response += '\n';
    std::size_t sent = 0;
    while (sent < response.size()) {
      ssize_t n = ::send(fd, response.data() + sent, response.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) break;
      sent += static_cast<std::size_t>(n);
    }
    if (sent < response.size()) break;
  }
  {
    std::lock_guard lock(mutex_);
    std::erase(open_fds_, fd);
  }
  ::close(fd);
}

}  // namespace wgtune
