#pragma once

// Declarative backend selection. The JSON form is
//
//   {
//     "seed": 0,
//     "captioner":        {"type": "mock", "fixtures": {"<frame hash>": "caption"}},
//     "text_embedder":    {"type": "mock", "dim": 4096, "fixtures": {"<text>": [..]}},
//     "object_extractor": {"type": "mock"},
//     "detector":         {"type": "mock", "synthesize": true,
//                          "fixtures": {"<frame hash>": [{"label": "", "confidence": 0.7,
//                                                         "box": [x0, y0, x1, y1]}]}},
//     "frame_embedder":   {"type": "endpoint", "url": "http://host:port", "model": "vit",
//                          "version": "1", "timeout_ms": 30000, "retries": 2,
//                          "backoff_ms": 200}
//   }
//
// Every capability defaults to its mock. Unknown top-level keys are ignored so
// the same file can carry command-line defaults.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sstem/backends.hpp"
#include "sstem/endpoint_client.hpp"

namespace sstem {

struct MockFixtures {
  std::map<std::string, std::string> captions;
  std::map<std::string, std::vector<double>> text_vectors;
  std::map<std::string, std::vector<Detection>> detections;
  std::map<std::string, std::vector<double>> frame_vectors;
};

struct BackendConfig {
  std::uint64_t seed = 0;
  std::size_t text_dim = 4096;
  bool synthesize_detections = true;
  MockFixtures fixtures;
  std::map<BackendKind, EndpointOptions> endpoints;  // absent kind -> mock

  bool uses_endpoint(BackendKind kind) const { return endpoints.contains(kind); }
};

BackendConfig parse_backend_config(std::string_view json_text);

// Canonical JSON echo of the effective configuration (fixtures summarised by
// count), suitable for embedding in outputs.
std::string describe_backend_config(const BackendConfig& config);

// Fresh, privately owned instances for one worker.
BackendSet make_backends(const BackendConfig& config);

}  // namespace sstem
