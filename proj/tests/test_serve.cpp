#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "wgtune/datastore.hpp"
#include "wgtune/errors.hpp"
#include "wgtune/serve.hpp"
#include "wgtune/synthgen.hpp"

using namespace wgtune;
using nlohmann::json;

namespace {

// Minimal line-oriented TCP client for talking to the daemon.
class LineClient {
 public:
  explicit LineClient(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd_ >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  }
  ~LineClient() { ::close(fd_); }

  json round_trip(const json& request) {
    std::string line = request.dump() + "\n";
    REQUIRE(::send(fd_, line.data(), line.size(), 0) ==
            static_cast<ssize_t>(line.size()));
    return json::parse(read_line());
  }

  json send_raw(const std::string& raw) {
    std::string line = raw + "\n";
    REQUIRE(::send(fd_, line.data(), line.size(), 0) ==
            static_cast<ssize_t>(line.size()));
    return json::parse(read_line());
  }

 private:
  std::string read_line() {
    while (buffer_.find('\n') == std::string::npos) {
      char chunk[512];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      REQUIRE(n > 0);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    auto pos = buffer_.find('\n');
    std::string line = buffer_.substr(0, pos);
    buffer_.erase(0, pos + 1);
    return line;
  }

  int fd_ = -1;
  std::string buffer_;
};

// A speedup-mode bundle over a tiny deterministic forest.
TunerBundle fixture_bundle() {
  RegressionDataset data;
  data.mode = RegressionMode::Speedup;
  auto scenarios = standard_scenarios(3);
  for (int i = 0; i < 6; ++i) {
    FeatureVector f = extract(scenarios[static_cast<std::size_t>(i)]);
    for (const auto& w : enumerate_space(64)) {
      // favour larger areas, aligned sizes best
      double target = 1.0 + 0.01 * static_cast<double>(w.area()) +
                      (w.cols() % 8 == 0 ? 0.5 : 0.0);
      data.rows.push_back({f, w, target});
    }
  }
  TunerBundle bundle;
  bundle.kind = TunerBundle::Kind::Regressor;
  bundle.regressor = train_regressor(data, 21, {.trees = 8});
  return bundle;
}

json predict_request(int max_wgsize) {
  auto scenarios = standard_scenarios(3);
  const auto& s = scenarios[45];
  return json{{"type", "predict"},
              {"scenario", json{{"device", device_to_json(s.device)},
                                {"kernel", kernel_to_json(s.kernel)},
                                {"dataset", dataset_to_json(s.dataset)}}},
              {"max_wgsize", max_wgsize},
              {"refused", json::array()}};
}

}  // namespace

TEST_CASE("bundle JSON round trip") {
  TunerBundle bundle = fixture_bundle();
  bundle.prior_refused = {WorkgroupSize(2, 2), WorkgroupSize(6, 4)};
  TunerBundle reloaded = TunerBundle::from_json(bundle.to_json());
  CHECK(reloaded.kind == TunerBundle::Kind::Regressor);
  CHECK(reloaded.prior_refused == bundle.prior_refused);

  auto scenarios = standard_scenarios(3);
  FeatureVector f = extract(scenarios[45]);
  for (const auto& w : enumerate_space(64)) {
    CHECK(bundle.regressor->predict(f, w) == reloaded.regressor->predict(f, w));
  }
}

TEST_CASE("handle_request without sockets") {
  TunerBundle bundle = fixture_bundle();
  Session session;

  SUBCASE("predict then repredict is stable") {
    json first = handle_request(bundle, session, predict_request(64).dump());
    REQUIRE(first.at("type") == "wgsize");
    json second = handle_request(bundle, session, predict_request(64).dump());
    CHECK(first == second);
  }

  SUBCASE("refusals change the proposal and are never repeated") {
    json first = handle_request(bundle, session, predict_request(64).dump());
    REQUIRE(first.at("type") == "wgsize");
    WorkgroupSize w1(first.at("w_c").get<int>(), first.at("w_r").get<int>());
    CHECK(w1.area() <= 64);

    json refusal{{"type", "refused"},
                 {"scenario_id", "x"},
                 {"w_c", w1.cols()},
                 {"w_r", w1.rows()}};
    json second = handle_request(bundle, session, refusal.dump());
    REQUIRE(second.at("type") == "wgsize");
    WorkgroupSize w2(second.at("w_c").get<int>(), second.at("w_r").get<int>());
    CHECK(w2 != w1);
    CHECK(w2.area() <= 64);
  }

  SUBCASE("refused before any predict is an error") {
    json refusal{{"type", "refused"}, {"scenario_id", "x"}, {"w_c", 4}, {"w_r", 4}};
    CHECK(handle_request(bundle, session, refusal.dump()).at("type") == "error");
  }

  SUBCASE("listed refused sizes are excluded from the first proposal") {
    json request = predict_request(8);  // candidates (2,2) (2,4) (4,2)
    request["refused"] = json::array({json::array({4, 2}), json::array({2, 4})});
    json response = handle_request(bundle, session, request.dump());
    REQUIRE(response.at("type") == "wgsize");
    CHECK(WorkgroupSize(response.at("w_c").get<int>(), response.at("w_r").get<int>()) ==
          WorkgroupSize(2, 2));
  }

  SUBCASE("malformed input") {
    CHECK(handle_request(bundle, session, "this is not json").at("type") == "error");
    CHECK(handle_request(bundle, session, "{\"type\":\"bogus\"}").at("type") == "error");
    CHECK(handle_request(bundle, session, "{\"type\":\"predict\"}").at("type") == "error");
  }
}

TEST_CASE("daemon over TCP") {
  TunerBundle bundle = fixture_bundle();
  PredictionServer server(bundle, 0);
  REQUIRE(server.port() != 0);
  server.start();

  SUBCASE("predict, refuse, repredict") {
    LineClient client(server.port());
    json first = client.round_trip(predict_request(64));
    REQUIRE(first.at("type") == "wgsize");
    WorkgroupSize w1(first.at("w_c").get<int>(), first.at("w_r").get<int>());
    CHECK(w1.area() <= 64);

    json second = client.round_trip(json{{"type", "refused"},
                                         {"scenario_id", "x"},
                                         {"w_c", w1.cols()},
                                         {"w_r", w1.rows()}});
    REQUIRE(second.at("type") == "wgsize");
    WorkgroupSize w2(second.at("w_c").get<int>(), second.at("w_r").get<int>());
    CHECK(w2 != w1);
    CHECK(w2.area() <= 64);
  }

  SUBCASE("a malformed line leaves the connection usable") {
    LineClient client(server.port());
    CHECK(client.send_raw("...").at("type") == "error");
    CHECK(client.round_trip(predict_request(64)).at("type") == "wgsize");
  }

  SUBCASE("sessions are isolated per connection") {
    LineClient a(server.port());
    LineClient b(server.port());
    json first_a = a.round_trip(predict_request(64));
    REQUIRE(first_a.at("type") == "wgsize");
    // a refusal on connection A must not change B's fresh prediction
    a.round_trip(json{{"type", "refused"},
                      {"scenario_id", "x"},
                      {"w_c", first_a.at("w_c").get<int>()},
                      {"w_r", first_a.at("w_r").get<int>()}});
    json first_b = b.round_trip(predict_request(64));
    CHECK(first_b == first_a);
  }

  server.stop();
}

TEST_CASE("port conflicts raise IoError") {
  TunerBundle bundle = fixture_bundle();
  PredictionServer server(bundle, 0);
  CHECK_THROWS_AS(PredictionServer(bundle, server.port()), IoError);
}
