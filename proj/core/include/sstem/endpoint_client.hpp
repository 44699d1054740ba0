#pragma once

// Client backends for externally hosted model servers.
//
// Wire format: POST {base_url}/v1/{kind} with a JSON body, JSON response.
//   captioner         {"image": IMG}                    -> {"caption": str}
//   text_embedder     {"text": str}                     -> {"embedding": [num]}
//   object_extractor  {"instruction": str,
//                      "edit_prompt": str}              -> {"object": str}
//   detector          {"image": IMG, "query": str}      -> {"detections": [
//                        {"label": str, "confidence": num, "box": [x0,y0,x1,y1]}]}
//   frame_embedder    {"image": IMG}                    -> {"embedding": [num]}
// where IMG = {"format": "png", "width": int, "height": int, "data": base64}.
//
// Connection failures on every attempt surface as kBackendUnavailable. Any
// other failure (timeout, 5xx, malformed response) surfaces as
// kInferenceFailed once the retries are spent. Nothing is ever defaulted.

#include <memory>
#include <string>

#include "sstem/backends.hpp"

namespace sstem {

struct EndpointOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string model = "remote";
  std::string version = "1";
  int timeout_ms = 30000;
  int retries = 2;        // extra attempts after the first
  int backoff_ms = 200;   // doubled after each failed attempt
};

std::unique_ptr<Captioner> make_endpoint_captioner(const EndpointOptions& options);
std::unique_ptr<TextEmbedder> make_endpoint_text_embedder(const EndpointOptions& options);
std::unique_ptr<ObjectExtractor> make_endpoint_object_extractor(const EndpointOptions& options);
std::unique_ptr<Detector> make_endpoint_detector(const EndpointOptions& options);
std::unique_ptr<FrameEmbedder> make_endpoint_frame_embedder(const EndpointOptions& options);

// PNG-encodes an RGB raster for transport.
std::string encode_png(const RgbImage& image);

}  // namespace sstem
