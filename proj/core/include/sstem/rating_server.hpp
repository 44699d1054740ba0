#pragma once

// HTTP front end for RatingService.
//
//   GET  /api/health
//   GET  /api/tasks/next?rater=<id>[&dataset=<id>]   -> {"task": {...}} or {"task": null}
//   POST /api/ratings   {"rater_id", "video_id", "semantic", "spatial", "temporal"}
//   GET  /api/aggregates
//   GET  /api/export                                  -> human scores CSV
//   GET  /api/media/<video_id>/<original|edited>      (supports Range requests)
//   GET  /                                            static UI bundle, if configured
//
// Errors are JSON bodies {"error": "<CODE>", "message": "..."}.

#include <filesystem>
#include <memory>
#include <string>

#include "sstem/rating.hpp"

namespace sstem::rating {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;                      // 0 picks a free port
  std::filesystem::path media_root;     // base for relative manifest paths
  std::filesystem::path ui_dir;         // optional static bundle served at /
};

class RatingServer {
 public:
  RatingServer(RatingService& service, ServerOptions options);
  ~RatingServer();
  RatingServer(const RatingServer&) = delete;
  RatingServer& operator=(const RatingServer&) = delete;

  // Returns false if the address cannot be bound.
  bool bind();
  int port() const;
  // Serves until stop(); requires a successful bind().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sstem::rating
