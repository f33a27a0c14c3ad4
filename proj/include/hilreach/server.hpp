#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "hilreach/plant.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/scenario.hpp"
#include "hilreach/session.hpp"

namespace hilreach {

struct ServerConfig {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path trialsDir = "trials";
  // Wall-clock period of the tick loop; simulated time always advances by dt.
  std::chrono::microseconds tickInterval{40000};
  std::uint64_t seed = 0;  // sessions created without a seed use deriveSeed(seed, n)
  WorldConfig world;
  PlantParams plant;
  std::shared_ptr<const BehaviorModel> overlayModel;
  OverlayConfig overlay;
};

// Overrides port and trials directory from PORT and TRIALS_DIR when set.
ServerConfig applyEnvironment(ServerConfig config);

/// HTTP + WebSocket front end for live sessions.
///
///   POST   /sessions               -> {id, channel, seed, dt, ...}
///   DELETE /sessions/{id}          -> ends and persists, {id, trial, outcome, samples}
///   GET    /sessions/{id}/trial    -> {id, csv, sidecar}
///   GET    /health                 -> {status, sessions}
///   WS     /sessions/{id}/channel  -> frames down, inputs up
///
/// The tick loop of a session starts when its channel connects.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on a background thread; returns the bound port.
  unsigned short start();
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();
  // start() followed by serving until SIGINT or SIGTERM.
  void runUntilSignal();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

nlohmann::json frameJson(const TelemetryFrame& frame);

}  // namespace hilreach
