#include "sstem/endpoint_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <thread>

#include "sstem/error.hpp"
#include "sstem/hashing.hpp"

namespace sstem {

using nlohmann::json;

std::string encode_png(const RgbImage& image) {
  if (!image.valid()) throw Error(ErrorCode::kInvalidArgument, "cannot encode an invalid raster");
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", bgr, buf)) throw Error(ErrorCode::kIoError, "PNG encoding failed");
  return std::string(buf.begin(), buf.end());
}

namespace {

json image_payload(const Frame& frame) {
  return {{"format", "png"},
          {"width", frame.image.width},
          {"height", frame.image.height},
          {"data", base64_encode(encode_png(frame.image))}};
}

class EndpointTransport {
 public:
  explicit EndpointTransport(EndpointOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "endpoint base_url must be non-empty");
    }
  }

  const EndpointOptions& options() const { return options_; }

  json post(BackendKind kind, const json& body) const {
    const std::string path = "/v1/" + std::string(to_string(kind));
    const std::string payload = body.dump();
    const auto timeout = std::chrono::milliseconds(options_.timeout_ms);

    bool all_connection_failures = true;
    std::string last_failure;
    const int attempts = 1 + std::max(0, options_.retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms) * (1 << (attempt - 1)));
      }
      httplib::Client cli(options_.base_url);
      cli.set_connection_timeout(timeout);
      cli.set_read_timeout(timeout);
      cli.set_write_timeout(timeout);
      auto res = cli.Post(path, payload, "application/json");
      if (!res) {
        const auto err = res.error();
        if (err != httplib::Error::Connection) all_connection_failures = false;
        last_failure = "transport error: " + httplib::to_string(err);
        continue;
      }
      all_connection_failures = false;
      if (res->status >= 500 || res->status == 429) {
        last_failure = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorCode::kInferenceFailed,
                    options_.base_url + path + " returned HTTP " + std::to_string(res->status));
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kInferenceFailed, options_.base_url + path + ": malformed response: " + e.what());
      }
    }
    const auto code = all_connection_failures ? ErrorCode::kBackendUnavailable : ErrorCode::kInferenceFailed;
    throw Error(code, options_.base_url + path + " failed after " + std::to_string(attempts) +
                          " attempt(s): " + last_failure);
  }

  BackendId id(BackendKind kind) const {
    return {kind, "endpoint-" + options_.model, options_.version};
  }

 private:
  EndpointOptions options_;
};

template <typename T>
T field(const json& body, const char* key, BackendKind kind) {
  try {
    return body.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInferenceFailed,
                std::string(to_string(kind)) + " response missing or invalid '" + key + "': " + e.what());
  }
}

Embedding to_embedding(const json& body, BackendKind kind) {
  Embedding e{field<std::vector<double>>(body, "embedding", kind)};
  if (!e.valid()) throw Error(ErrorCode::kInferenceFailed, std::string(to_string(kind)) + " returned an invalid embedding");
  return e;
}

class EndpointCaptioner final : public Captioner {
 public:
  explicit EndpointCaptioner(const EndpointOptions& o) : t_(o) {}
  BackendId id() const override { return t_.id(BackendKind::kCaptioner); }
  std::string caption(const Frame& frame) override {
    auto body = t_.post(BackendKind::kCaptioner, {{"image", image_payload(frame)}});
    auto caption = field<std::string>(body, "caption", BackendKind::kCaptioner);
    if (caption.empty()) throw Error(ErrorCode::kInferenceFailed, "captioner returned an empty caption");
    return caption;
  }

 private:
  EndpointTransport t_;
};

class EndpointTextEmbedder final : public TextEmbedder {
 public:
  explicit EndpointTextEmbedder(const EndpointOptions& o) : t_(o) {}
  BackendId id() const override { return t_.id(BackendKind::kTextEmbedder); }
  Embedding embed_text(std::string_view text) override {
    if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "text must be non-empty");
    return to_embedding(t_.post(BackendKind::kTextEmbedder, {{"text", text}}), BackendKind::kTextEmbedder);
  }

 private:
  EndpointTransport t_;
};

class EndpointObjectExtractor final : public ObjectExtractor {
 public:
  explicit EndpointObjectExtractor(const EndpointOptions& o) : t_(o) {}
  BackendId id() const override { return t_.id(BackendKind::kObjectExtractor); }
  std::string extract_primary_object(std::string_view edit_prompt) override {
    if (edit_prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "edit prompt must be non-empty");
    auto body = t_.post(BackendKind::kObjectExtractor,
                        {{"instruction", render_object_extraction_prompt(edit_prompt)},
                         {"edit_prompt", edit_prompt}});
    auto it = body.find("object");
    std::string raw = (it != body.end() && it->is_string()) ? it->get<std::string>() : std::string();
    std::string out;
    for (unsigned char c : raw) out.push_back(static_cast<char>(std::tolower(c)));
    const auto first = out.find_first_not_of(" \t\r\n\"'.");
    const auto last = out.find_last_not_of(" \t\r\n\"'.");
    out = first == std::string::npos ? std::string() : out.substr(first, last - first + 1);
    if (out.empty()) throw Error(ErrorCode::kExtractionEmpty, "object extractor returned nothing usable");
    return out;
  }

 private:
  EndpointTransport t_;
};

class EndpointDetector final : public Detector {
 public:
  explicit EndpointDetector(const EndpointOptions& o) : t_(o) {}
  BackendId id() const override { return t_.id(BackendKind::kDetector); }
  std::vector<Detection> detect(const Frame& frame, std::string_view query) override {
    if (query.empty()) throw Error(ErrorCode::kInvalidArgument, "detection query must be non-empty");
    auto body = t_.post(BackendKind::kDetector, {{"image", image_payload(frame)}, {"query", query}});
    std::vector<Detection> out;
    for (const auto& d : field<json>(body, "detections", BackendKind::kDetector)) {
      Detection det;
      det.label = field<std::string>(d, "label", BackendKind::kDetector);
      det.confidence = field<double>(d, "confidence", BackendKind::kDetector);
      auto box = field<std::vector<double>>(d, "box", BackendKind::kDetector);
      if (box.size() != 4) throw Error(ErrorCode::kInferenceFailed, "detection box must have 4 entries");
      det.box = {box[0], box[1], box[2], box[3]};
      if (!det.valid()) throw Error(ErrorCode::kInferenceFailed, "detector returned an invalid detection");
      out.push_back(std::move(det));
    }
    return out;
  }

 private:
  EndpointTransport t_;
};

class EndpointFrameEmbedder final : public FrameEmbedder {
 public:
  explicit EndpointFrameEmbedder(const EndpointOptions& o) : t_(o) {}
  BackendId id() const override { return t_.id(BackendKind::kFrameEmbedder); }
  Embedding embed_frame(const Frame& frame) override {
    return to_embedding(t_.post(BackendKind::kFrameEmbedder, {{"image", image_payload(frame)}}),
                        BackendKind::kFrameEmbedder);
  }

 private:
  EndpointTransport t_;
};

}  // namespace

std::unique_ptr<Captioner> make_endpoint_captioner(const EndpointOptions& o) {
  return std::make_unique<EndpointCaptioner>(o);
}
std::unique_ptr<TextEmbedder> make_endpoint_text_embedder(const EndpointOptions& o) {
  return std::make_unique<EndpointTextEmbedder>(o);
}
std::unique_ptr<ObjectExtractor> make_endpoint_object_extractor(const EndpointOptions& o) {
  return std::make_unique<EndpointObjectExtractor>(o);
}
std::unique_ptr<Detector> make_endpoint_detector(const EndpointOptions& o) {
  return std::make_unique<EndpointDetector>(o);
}
std::unique_ptr<FrameEmbedder> make_endpoint_frame_embedder(const EndpointOptions& o) {
  return std::make_unique<EndpointFrameEmbedder>(o);
}

}  // namespace sstem
