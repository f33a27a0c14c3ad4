#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "hilreach/errors.hpp"
#include "hilreach/json_io.hpp"
#include "hilreach/rng.hpp"
#include "hilreach/server.hpp"
#include "hilreach/trajio.hpp"
#include "test_support.hpp"

using namespace hilreach;
using namespace testing_support;

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

struct Reply {
  unsigned status = 0;
  json body;
};

Reply request(unsigned short port, http::verb verb, const std::string& target, const std::string& body = "") {
  net::io_context ioc;
  beast::tcp_stream stream(ioc);
  stream.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "localhost");
  req.body() = body;
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {res.result_int(), res.body().empty() ? json() : json::parse(res.body())};
}

class Channel {
 public:
  Channel(unsigned short port, const std::string& path) : ws_(ioc_) {
    net::connect(ws_.next_layer(), std::vector{tcp::endpoint(net::ip::make_address("127.0.0.1"), port)});
    ws_.handshake("localhost", path);
  }
  json read() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
  void send(const json& j) { ws_.write(net::buffer(j.dump())); }
  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

struct Fixture {
  TempDir dir{"server"};
  std::shared_ptr<const BehaviorModel> model =
      std::make_shared<const BehaviorModel>(splitBlocks(groundTruthBehavior()));
  Server server;
  unsigned short port = 0;

  explicit Fixture(std::chrono::microseconds tick = std::chrono::microseconds(1000))
      : server(makeConfig(tick)) {
    port = server.start();
  }

  ServerConfig makeConfig(std::chrono::microseconds tick) {
    ServerConfig c;
    c.address = "127.0.0.1";
    c.port = 0;
    c.trialsDir = dir.path / "trials";
    c.tickInterval = tick;
    c.seed = 7;
    c.overlayModel = model;
    c.overlay.cadenceTicks = 10;
    c.overlay.nx = 9;
    c.overlay.ny = 11;
    return c;
  }
};

}  // namespace

TEST(Server, HealthAndRouting) {
  Fixture f;
  Reply r = request(f.port, http::verb::get, "/health");
  EXPECT_EQ(r.status, 200u);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["sessions"], 0);
  EXPECT_EQ(request(f.port, http::verb::get, "/nowhere").status, 404u);
  EXPECT_EQ(request(f.port, http::verb::post, "/health").status, 405u);
  EXPECT_EQ(request(f.port, http::verb::get, "/sessions").status, 405u);
  EXPECT_EQ(request(f.port, http::verb::delete_, "/sessions/missing").status, 404u);
  EXPECT_EQ(request(f.port, http::verb::get, "/sessions/missing/trial").status, 404u);
  EXPECT_EQ(request(f.port, http::verb::post, "/sessions", "{broken").status, 400u);
}

TEST(Server, CreateSessionReportsChannelAndStart) {
  Fixture f;
  const Reply r = request(f.port, http::verb::post, "/sessions", R"({"seed": 12})");
  ASSERT_EQ(r.status, 201u);
  EXPECT_EQ(r.body["seed"], 12);
  EXPECT_EQ(r.body["dt"], 0.04);
  EXPECT_EQ(r.body["channel"], "/sessions/" + r.body["id"].get<std::string>() + "/channel");
  EXPECT_EQ(io::vectorFromJson(r.body["state"]), Eigen::VectorXd(WorldConfig{}.startState()));
  EXPECT_TRUE(r.body["overlay"].get<bool>());
  EXPECT_EQ(request(f.port, http::verb::get, "/health").body["sessions"], 1);
  const Reply unseeded = request(f.port, http::verb::post, "/sessions");
  EXPECT_EQ(unseeded.body["seed"], deriveSeed(7, 1));
}

TEST(Server, ChannelStreamsFramesAndAppliesLatestInput) {
  Fixture f;
  const Reply r = request(f.port, http::verb::post, "/sessions", R"({"seed": 3, "overlay": false})");
  Channel ch(f.port, r.body["channel"]);
  json frame = ch.read();
  EXPECT_EQ(frame["type"], "frame");
  EXPECT_EQ(frame["tick"], 1);
  EXPECT_NEAR(frame["t"].get<double>(), 0.04, 1e-15);
  EXPECT_EQ(frame["state"].size(), 6u);
  EXPECT_TRUE(frame["events"].is_array());
  EXPECT_EQ(frame["phase"], "preSpawn");

  ch.send({{"type", "input"}, {"seq", 10}, {"alpha", 0.25}, {"thrust", 9.0}});
  ch.send({{"type", "input"}, {"seq", 4}, {"alpha", -0.25}, {"thrust", 0.0}});
  ch.send({{"type", "bogus"}});
  ch.send(json("not an object"));
  bool seen = false;
  for (int k = 0; k < 400 && !seen; ++k) {
    frame = ch.read();
    seen = frame["input"][0] == 0.25;
  }
  ASSERT_TRUE(seen);
  EXPECT_EQ(frame["input"][1], 1.7);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(ch.read()["input"][0], 0.25);
  ch.close();
}

TEST(Server, SpawnFrameAndOverlay) {
  Fixture f;
  const std::uint64_t seed = 21;
  const Reply r = request(f.port, http::verb::post, "/sessions", json{{"seed", seed}}.dump());
  Channel ch(f.port, r.body["channel"]);
  const World w0 = makeWorld(WorldConfig{}, seed, 0.04);
  std::map<int, Eigen::VectorXd> states;
  int spawnTick = -1;
  json overlay;
  for (int k = 0; k < 600 && overlay.is_null(); ++k) {
    const json frame = ch.read();
    const int tick = frame["tick"];
    states[tick] = io::vectorFromJson(frame["state"]);
    for (const auto& e : frame["events"]) {
      if (e == "obstacleSpawned") spawnTick = tick;
    }
    if (frame.contains("overlay")) overlay = frame["overlay"];
  }
  ch.close();
  ASSERT_EQ(spawnTick, w0.spawnStep);
  ASSERT_FALSE(overlay.is_null());
  EXPECT_EQ(overlay["grid"]["values"].size(), 99u);
  const int at = overlay["computedAtTick"];
  World w = w0;
  w.obstacle = w0.spawnRect;
  OverlayConfig cfg;
  cfg.cadenceTicks = 10;
  cfg.nx = 9;
  cfg.ny = 11;
  const Overlay expected =
      computeOverlay(*f.model, buildPlant({}), w, states.at(at), (at - spawnTick) * 0.04, at, cfg);
  EXPECT_EQ(overlay["risk"].get<double>(), expected.risk);
  EXPECT_EQ(overlay["grid"]["values"].get<std::vector<double>>(), expected.grid.values);
}

TEST(Server, DeletePersistsAndTrialIsServed) {
  Fixture f;
  const Reply r = request(f.port, http::verb::post, "/sessions", R"({"seed": 5})");
  const std::string id = r.body["id"];
  {
    Channel ch(f.port, r.body["channel"]);
    for (int k = 0; k < 30; ++k) ch.read();
    EXPECT_THROW(Channel(f.port, r.body["channel"]), boost::system::system_error);
    ch.close();
  }
  const Reply live = request(f.port, http::verb::get, "/sessions/" + id + "/trial");
  EXPECT_EQ(live.status, 200u);
  const Reply del = request(f.port, http::verb::delete_, "/sessions/" + id);
  ASSERT_EQ(del.status, 200u);
  EXPECT_EQ(del.body["outcome"], "aborted");
  EXPECT_GE(del.body["samples"].get<std::size_t>(), 31u);
  const std::filesystem::path path = del.body["trial"].get<std::string>();
  EXPECT_EQ(path, trialPath(f.dir.path / "trials", 0));
  const Trajectory saved = loadTrajectory(path);
  EXPECT_EQ(saved.samples.size(), del.body["samples"].get<std::size_t>());

  const Reply trial = request(f.port, http::verb::get, "/sessions/" + id + "/trial");
  ASSERT_EQ(trial.status, 200u);
  EXPECT_EQ(trial.body["csv"], slurp(path));
  EXPECT_EQ(trial.body["sidecar"]["outcome"], "aborted");
  EXPECT_EQ(request(f.port, http::verb::delete_, "/sessions/" + id).status, 404u);
  EXPECT_EQ(request(f.port, http::verb::get, "/health").body["sessions"], 0);
}

TEST(Server, EnvironmentOverridesPortAndTrialsDir) {
  ::setenv("PORT", "9123", 1);
  ::setenv("TRIALS_DIR", "/tmp/elsewhere", 1);
  const ServerConfig c = applyEnvironment({});
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.trialsDir, "/tmp/elsewhere");
  ::setenv("PORT", "http", 1);
  EXPECT_THROW(applyEnvironment({}), ConfigError);
  ::unsetenv("PORT");
  ::unsetenv("TRIALS_DIR");
  EXPECT_EQ(applyEnvironment({}).port, 8080);
}
