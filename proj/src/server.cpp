#include "hilreach/server.hpp"

#include <csignal>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "hilreach/errors.hpp"
#include "hilreach/json_io.hpp"
#include "hilreach/rng.hpp"

namespace hilreach {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

struct Mailbox {
  InputVector input = InputVector::Zero();
  std::int64_t seq = -1;

  // Latest wins; messages older than the last accepted one are dropped.
  void offer(const InputVector& u, std::int64_t s) {
    if (s < seq) return;
    input = u;
    seq = s;
  }
};

struct LiveSession {
  LiveSession(Session s) : session(std::move(s)) {}

  Session session;
  Mailbox mailbox;
  bool channelOpen = false;
  bool overlayRunning = false;
  std::optional<Overlay> pendingOverlay;
  std::optional<std::filesystem::path> persisted;
};

json overlayJson(const Overlay& o) {
  const auto& a = o.grid.axes;
  return {{"computedAtTick", o.computedAtTick},
          {"horizon", o.horizon},
          {"risk", o.risk},
          {"grid",
           {{"xMin", a.xMin},
            {"xMax", a.xMax},
            {"yMin", a.yMin},
            {"yMax", a.yMax},
            {"nx", a.nx},
            {"ny", a.ny},
            {"regularized", o.grid.regularized},
            {"values", o.grid.values}}}};
}

std::vector<std::string> splitPath(std::string_view target) {
  const auto q = target.find('?');
  if (q != std::string_view::npos) target = target.substr(0, q);
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < target.size()) {
    const auto next = target.find('/', pos);
    const auto end = next == std::string_view::npos ? target.size() : next;
    if (end > pos) parts.emplace_back(target.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

std::string_view targetOf(const http::request<http::string_body>& req) {
  return {req.target().data(), req.target().size()};
}

}  // namespace

json frameJson(const TelemetryFrame& frame) {
  json events = json::array();
  for (auto e : frame.events) events.push_back(std::string(toString(e)));
  json j = {{"type", "frame"},
            {"tick", frame.tick},
            {"t", frame.t},
            {"state", io::toJson(Eigen::VectorXd(frame.state))},
            {"input", io::toJson(Eigen::VectorXd(frame.input))},
            {"events", events},
            {"phase", std::string(toString(frame.phase))},
            {"terminal", frame.terminal}};
  if (frame.overlay) j["overlay"] = overlayJson(*frame.overlay);
  return j;
}

ServerConfig applyEnvironment(ServerConfig config) {
  if (const char* port = std::getenv("PORT"); port && *port) {
    char* end = nullptr;
    const long v = std::strtol(port, &end, 10);
    if (*end != '\0' || v < 0 || v > 65535) throw ConfigError("PORT must be an integer in [0, 65535]");
    config.port = static_cast<unsigned short>(v);
  }
  if (const char* dir = std::getenv("TRIALS_DIR"); dir && *dir) config.trialsDir = dir;
  return config;
}

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  explicit Impl(ServerConfig cfg)
      : config(std::move(cfg)), acceptor(ioc), store(config.trialsDir), overlayPool(1) {}

  ServerConfig config;
  net::io_context ioc;
  tcp::acceptor acceptor;
  TrialStore store;
  net::thread_pool overlayPool;
  std::thread ioThread;

  // Only touched on the io thread.
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  std::map<std::string, std::filesystem::path> finished;
  std::uint64_t created = 0;

  std::mutex stopMutex;
  std::condition_variable stopped;
  bool running = false;

  void accept();
  http::response<http::string_body> handle(const http::request<http::string_body>& req);
  void openChannel(tcp::socket socket, http::request<http::string_body> req);

  std::filesystem::path persist(LiveSession& live) {
    if (!live.persisted) live.persisted = store.persist(live.session.recording());
    finished[live.session.id()] = *live.persisted;
    return *live.persisted;
  }

  void launchOverlay(const std::shared_ptr<LiveSession>& live) {
    if (live->overlayRunning) return;
    live->overlayRunning = true;
    const Session& s = live->session;
    auto model = s.overlayModel();
    auto job = [self = shared_from_this(), live, model, plant = s.plant(), world = s.world(),
                state = s.state(), elapsed = s.elapsedSinceSpawn(), tick = s.clock(),
                cfg = s.overlayConfig()] {
      std::optional<Overlay> result;
      try {
        result = computeOverlay(*model, plant, world, state, elapsed, tick, cfg);
      } catch (const std::exception& e) {
        std::cerr << "overlay failed: " << e.what() << "\n";
      }
      net::post(self->ioc, [live, result = std::move(result)]() mutable {
        live->overlayRunning = false;
        if (result) live->pendingOverlay = std::move(result);
      });
    };
    net::post(overlayPool, std::move(job));
  }
};

namespace {

class Channel : public std::enable_shared_from_this<Channel> {
 public:
  Channel(std::shared_ptr<Server::Impl> server, std::shared_ptr<LiveSession> live, tcp::socket socket)
      : server_(std::move(server)),
        live_(std::move(live)),
        ws_(std::move(socket)),
        timer_(ws_.get_executor()) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        self->live_->channelOpen = false;
        return;
      }
      self->next_ = std::chrono::steady_clock::now();
      self->read();
      self->scheduleTick();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->live_->channelOpen = false;
        self->timer_.cancel();
        return;
      }
      self->onMessage(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void onMessage(const std::string& text) {
    try {
      const json msg = json::parse(text);
      if (msg.value("type", "") != "input") return;
      const InputVector u(msg.at("alpha").get<double>(), msg.at("thrust").get<double>());
      if (!u.allFinite()) return;
      live_->mailbox.offer(u, msg.value("seq", live_->mailbox.seq + 1));
    } catch (const json::exception&) {
      // Malformed client messages are ignored; the held input stays in force.
    }
  }

  void scheduleTick() {
    next_ += server_->config.tickInterval;
    timer_.expires_at(next_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->tick();
    });
  }

  void tick() {
    auto& live = *live_;
    TelemetryFrame frame = live.session.tick(live.mailbox.input);
    if (live.pendingOverlay) {
      frame.overlay = std::move(live.pendingOverlay);
      live.pendingOverlay.reset();
    }
    if (frame.overlayDue) server_->launchOverlay(live_);
    if (frame.terminal) server_->persist(live);
    send(frameJson(frame).dump());
    if (frame.terminal) {
      finishing_ = true;
      return;
    }
    scheduleTick();
  }

  void send(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) {
                        self->write();
                      } else if (self->finishing_) {
                        self->ws_.async_close(websocket::close_code::normal,
                                              [self](beast::error_code) {});
                      }
                    });
  }

  std::shared_ptr<Server::Impl> server_;
  std::shared_ptr<LiveSession> live_;
  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::chrono::steady_clock::time_point next_;
  bool closed_ = false;
  bool finishing_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(std::shared_ptr<Server::Impl> server, tcp::socket socket)
      : server_(std::move(server)), stream_(std::move(socket)) {}

  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->onRequest();
                     });
  }

 private:
  void onRequest() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      server_->openChannel(stream_.release_socket(), std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(server_->handle(req_));
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (res->keep_alive()) {
                          self->read();
                        } else {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                        }
                      });
  }

  std::shared_ptr<Server::Impl> server_;
  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

http::response<http::string_body> jsonResponse(http::status status, const json& body,
                                               unsigned version) {
  http::response<http::string_body> res{status, version};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.body() = body.dump();
  return res;
}

}  // namespace

void Server::Impl::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpConnection>(self, std::move(socket))->read();
    self->accept();
  });
}

http::response<http::string_body> Server::Impl::handle(const http::request<http::string_body>& req) {
  const unsigned v = req.version();
  const auto parts = splitPath(targetOf(req));
  const auto error = [v](http::status s, const std::string& msg) {
    return jsonResponse(s, {{"error", msg}}, v);
  };
  try {
    if (parts.size() == 1 && parts[0] == "health") {
      if (req.method() != http::verb::get) return error(http::status::method_not_allowed, "GET only");
      return jsonResponse(http::status::ok, {{"status", "ok"}, {"sessions", sessions.size()}}, v);
    }
    if (parts.size() == 1 && parts[0] == "sessions") {
      if (req.method() != http::verb::post) return error(http::status::method_not_allowed, "POST only");
      json body = json::object();
      if (!req.body().empty()) body = json::parse(req.body());
      const std::uint64_t n = created++;
      const std::uint64_t seed =
          body.contains("seed") ? body["seed"].get<std::uint64_t>() : deriveSeed(config.seed, n);
      const WorldConfig world =
          body.contains("world") ? io::worldConfigFromJson(body["world"]) : config.world;
      const bool overlay = body.value("overlay", true);
      char id[32];
      std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(n + 1));
      auto live = std::make_shared<LiveSession>(
          Session(id, world, config.plant, seed, overlay ? config.overlayModel : nullptr,
                  config.overlay));
      sessions[id] = live;
      const double tickMs = std::chrono::duration<double, std::milli>(config.tickInterval).count();
      return jsonResponse(http::status::created,
                          {{"id", id},
                           {"channel", std::string("/sessions/") + id + "/channel"},
                           {"seed", seed},
                           {"dt", config.plant.dt},
                           {"tickIntervalMs", tickMs},
                           {"overlay", overlay && config.overlayModel != nullptr},
                           {"world", io::toJson(world)},
                           {"state", io::toJson(Eigen::VectorXd(live->session.state()))}},
                          v);
    }
    if (parts.size() >= 2 && parts[0] == "sessions") {
      const std::string& id = parts[1];
      const auto it = sessions.find(id);
      if (parts.size() == 2) {
        if (req.method() != http::verb::delete_) return error(http::status::method_not_allowed, "DELETE only");
        if (it == sessions.end()) return error(http::status::not_found, "unknown session " + id);
        auto live = it->second;
        live->session.end();
        const auto path = persist(*live);
        sessions.erase(it);
        const auto rec = live->session.recording();
        return jsonResponse(http::status::ok,
                            {{"id", id},
                             {"trial", path.string()},
                             {"outcome", std::string(toString(rec.outcome))},
                             {"samples", rec.samples.size()}},
                            v);
      }
      if (parts.size() == 3 && parts[2] == "trial") {
        if (req.method() != http::verb::get) return error(http::status::method_not_allowed, "GET only");
        Trajectory traj;
        if (it != sessions.end()) {
          traj = it->second->session.recording();
        } else if (auto f = finished.find(id); f != finished.end()) {
          traj = loadTrajectory(f->second);
        } else {
          return error(http::status::not_found, "unknown session " + id);
        }
        return jsonResponse(http::status::ok,
                            {{"id", id},
                             {"csv", trajectoryCsv(traj)},
                             {"sidecar", json::parse(trajectorySidecar(traj))}},
                            v);
      }
    }
    return error(http::status::not_found, "no route for " + std::string(targetOf(req)));
  } catch (const json::exception& e) {
    return error(http::status::bad_request, e.what());
  } catch (const ConfigError& e) {
    return error(http::status::bad_request, e.what());
  } catch (const DataError& e) {
    return error(http::status::bad_request, e.what());
  } catch (const std::exception& e) {
    return error(http::status::internal_server_error, e.what());
  }
}

void Server::Impl::openChannel(tcp::socket socket, http::request<http::string_body> req) {
  const auto parts = splitPath(targetOf(req));
  auto reject = [&](http::status status, const std::string& msg) {
    auto res = std::make_shared<http::response<http::string_body>>(
        jsonResponse(status, {{"error", msg}}, req.version()));
    res->prepare_payload();
    auto stream = std::make_shared<beast::tcp_stream>(std::move(socket));
    http::async_write(*stream, *res, [stream, res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      stream->socket().shutdown(tcp::socket::shutdown_both, ignored);
    });
  };
  if (parts.size() != 3 || parts[0] != "sessions" || parts[2] != "channel") {
    return reject(http::status::not_found, "no channel at " + std::string(targetOf(req)));
  }
  const auto it = sessions.find(parts[1]);
  if (it == sessions.end()) return reject(http::status::not_found, "unknown session " + parts[1]);
  auto live = it->second;
  if (live->channelOpen) return reject(http::status::conflict, "session already has a channel");
  if (live->session.phase() == Phase::Ended) return reject(http::status::gone, "session ended");
  live->channelOpen = true;
  std::make_shared<Channel>(shared_from_this(), live, std::move(socket))->run(std::move(req));
}

Server::Server(ServerConfig config) : impl_(std::make_shared<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  auto& s = *impl_;
  const tcp::endpoint endpoint(net::ip::make_address(s.config.address), s.config.port);
  s.acceptor.open(endpoint.protocol());
  s.acceptor.set_option(net::socket_base::reuse_address(true));
  s.acceptor.bind(endpoint);
  s.acceptor.listen(net::socket_base::max_listen_connections);
  s.accept();
  {
    std::lock_guard lock(s.stopMutex);
    s.running = true;
  }
  s.ioThread = std::thread([impl = impl_] { impl->ioc.run(); });
  return s.acceptor.local_endpoint().port();
}

void Server::stop() {
  if (!impl_) return;
  auto& s = *impl_;
  s.ioc.stop();
  if (s.ioThread.joinable()) s.ioThread.join();
  s.overlayPool.join();
  {
    std::lock_guard lock(s.stopMutex);
    s.running = false;
  }
  s.stopped.notify_all();
}

void Server::runUntilSignal() {
  start();
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([impl = impl_](beast::error_code, int) {
    impl->ioc.stop();
    std::lock_guard lock(impl->stopMutex);
    impl->running = false;
    impl->stopped.notify_all();
  });
  wait();
  stop();
}

void Server::wait() {
  auto& s = *impl_;
  std::unique_lock lock(s.stopMutex);
  s.stopped.wait(lock, [&] { return !s.running; });
}

}  // namespace hilreach
