#include "sstem/rating_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>

#include "sstem/error.hpp"

namespace sstem::rating {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownVideo:
    case ErrorCode::kUnknownDataset: return 404;
    case ErrorCode::kOutOfRange:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, {{"error", to_string(e.code())}, {"message", e.what()}}, http_status(e.code()));
}

std::string media_type(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  if (ext == ".mov") return "video/quicktime";
  if (ext == ".avi") return "video/x-msvideo";
  if (ext == ".mkv") return "video/x-matroska";
  if (ext == ".gif") return "image/gif";
  return "application/octet-stream";
}

json task_json(const RatingTask& t) {
  return {{"task_id", t.task_id},
          {"video_id", t.video_id},
          {"original_media_url", t.original_media_url},
          {"edited_media_url", t.edited_media_url},
          {"edit_prompt", t.edit_prompt},
          {"rubric", t.rubric}};
}

json rating_json(const StoredRating& r) {
  return {{"video_id", r.record.video_id},
          {"rater_id", r.record.rater_id},
          {"semantic", r.axes.semantic},
          {"spatial", r.axes.spatial},
          {"temporal", r.axes.temporal},
          {"raw_score", r.record.raw_score},
          {"normalized", r.record.normalized},
          {"timestamp", r.record.timestamp}};
}

}  // namespace

struct RatingServer::Impl {
  RatingService& service;
  ServerOptions options;
  httplib::Server server;
  int bound_port = -1;

  Impl(RatingService& s, ServerOptions o) : service(s), options(std::move(o)) {
    // The library default adds SO_REUSEPORT, which would let a second server
    // share an occupied port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  void routes() {
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"},
                      {"dataset_id", service.manifest().dataset_id},
                      {"videos", service.manifest().videos.size()}});
    });

    server.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto rater = req.get_param_value("rater");
        std::optional<std::string> dataset;
        if (req.has_param("dataset")) dataset = req.get_param_value("dataset");
        const auto task = service.next_task(rater, dataset);
        send_json(res, {{"task", task ? task_json(*task) : json(nullptr)}});
      } catch (const Error& e) {
        send_error(res, e);
      }
    });

    server.Post("/api/ratings", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::exception& e) {
          throw Error(ErrorCode::kParseError, std::string("request body: ") + e.what());
        }
        auto str = [&](const char* k) {
          auto it = body.find(k);
          if (it == body.end() || !it->is_string()) {
            throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + k + "'");
          }
          return it->get<std::string>();
        };
        auto axis = [&](const char* k) {
          auto it = body.find(k);
          if (it == body.end() || !it->is_number_integer()) {
            throw Error(ErrorCode::kOutOfRange, std::string("axis '") + k + "' must be an integer in [1, 10]");
          }
          return it->get<int>();
        };
        const AxisScores axes{axis("semantic"), axis("spatial"), axis("temporal")};
        const auto stored = service.submit_rating(str("rater_id"), str("video_id"), axes);
        send_json(res, rating_json(stored));
      } catch (const Error& e) {
        send_error(res, e);
      }
    });

    server.Get("/api/aggregates", [this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& a : service.aggregates()) {
        arr.push_back({{"video_id", a.video_id},
                       {"mean_normalized", a.mean_normalized},
                       {"n_raters", a.n_raters},
                       {"axis_means",
                        {{"semantic", a.semantic_mean}, {"spatial", a.spatial_mean}, {"temporal", a.temporal_mean}}}});
      }
      send_json(res, {{"aggregates", arr}});
    });

    server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(service.export_human_scores(), "text/csv");
    });

    server.Get(R"(/api/media/([^/]+)/(original|edited))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto video_id = req.matches[1].str();
      const auto which = req.matches[2].str();
      const auto* entry = service.manifest().find(video_id);
      if (entry == nullptr) {
        send_error(res, Error(ErrorCode::kUnknownVideo, "no video '" + video_id + "'"));
        return;
      }
      const auto path =
          resolve_media_path(options.media_root, which == "original" ? entry->original_path : entry->edited_path);
      std::error_code ec;
      if (!fs::is_regular_file(path, ec)) {
        send_error(res, Error(ErrorCode::kUnknownVideo, "media for '" + video_id + "' is not a streamable file"));
        return;
      }
      const auto size = static_cast<std::size_t>(fs::file_size(path, ec));
      auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
      res.set_header("Accept-Ranges", "bytes");
      res.set_content_provider(size, media_type(path),
                               [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                                 std::vector<char> buf(std::min<std::size_t>(length, 64 * 1024));
                                 file->clear();
                                 file->seekg(static_cast<std::streamoff>(offset));
                                 file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
                                 const auto got = static_cast<std::size_t>(file->gcount());
                                 if (got == 0) return false;
                                 return sink.write(buf.data(), got);
                               });
    });

    if (!options.ui_dir.empty()) server.set_mount_point("/", options.ui_dir.string());
  }
};

RatingServer::RatingServer(RatingService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

RatingServer::~RatingServer() { stop(); }

bool RatingServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(o.host);
    return impl_->bound_port > 0;
  }
  if (!impl_->server.bind_to_port(o.host, o.port)) return false;
  impl_->bound_port = o.port;
  return true;
}

int RatingServer::port() const { return impl_->bound_port; }

void RatingServer::run() { impl_->server.listen_after_bind(); }

void RatingServer::stop() {
  if (impl_) impl_->server.stop();
}

bool RatingServer::running() const { return impl_->server.is_running(); }

}  // namespace sstem::rating
