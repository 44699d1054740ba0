#include "sstem/backend_config.hpp"

#include <nlohmann/json.hpp>

#include "sstem/error.hpp"
#include "sstem/mock_backends.hpp"

namespace sstem {

using nlohmann::json;

namespace {

constexpr BackendKind kAllKinds[] = {BackendKind::kCaptioner, BackendKind::kTextEmbedder,
                                     BackendKind::kObjectExtractor, BackendKind::kDetector,
                                     BackendKind::kFrameEmbedder};

EndpointOptions parse_endpoint(const json& node, BackendKind kind) {
  EndpointOptions o;
  o.base_url = node.value("url", std::string());
  if (o.base_url.empty()) {
    throw Error(ErrorCode::kParseError, std::string(to_string(kind)) + ": endpoint backend requires 'url'");
  }
  o.model = node.value("model", o.model);
  o.version = node.value("version", o.version);
  o.timeout_ms = node.value("timeout_ms", o.timeout_ms);
  o.retries = node.value("retries", o.retries);
  o.backoff_ms = node.value("backoff_ms", o.backoff_ms);
  return o;
}

Detection parse_detection(const json& d) {
  Detection det;
  det.label = d.value("label", std::string());
  det.confidence = d.at("confidence").get<double>();
  if (d.contains("box")) {
    auto b = d.at("box").get<std::vector<double>>();
    if (b.size() != 4) throw Error(ErrorCode::kParseError, "detection box must have 4 entries");
    det.box = {b[0], b[1], b[2], b[3]};
  }
  if (!det.valid()) throw Error(ErrorCode::kParseError, "invalid fixture detection");
  return det;
}

}  // namespace

BackendConfig parse_backend_config(std::string_view json_text) {
  BackendConfig cfg;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, "backend config must be a JSON object");
    cfg.seed = doc.value("seed", cfg.seed);
    for (auto kind : kAllKinds) {
      const auto key = std::string(to_string(kind));
      if (!doc.contains(key)) continue;
      const json& node = doc.at(key);
      const auto type = node.value("type", std::string("mock"));
      if (type == "endpoint") {
        cfg.endpoints[kind] = parse_endpoint(node, kind);
        continue;
      }
      if (type != "mock") {
        throw Error(ErrorCode::kParseError, key + ": unknown backend type '" + type + "'");
      }
      const json fixtures = node.value("fixtures", json::object());
      switch (kind) {
        case BackendKind::kCaptioner:
          cfg.fixtures.captions = fixtures.get<std::map<std::string, std::string>>();
          break;
        case BackendKind::kTextEmbedder:
          cfg.text_dim = node.value("dim", cfg.text_dim);
          cfg.fixtures.text_vectors = fixtures.get<std::map<std::string, std::vector<double>>>();
          break;
        case BackendKind::kObjectExtractor:
          break;
        case BackendKind::kDetector:
          cfg.synthesize_detections = node.value("synthesize", cfg.synthesize_detections);
          for (const auto& [hash, dets] : fixtures.items()) {
            auto& slot = cfg.fixtures.detections[hash];
            for (const auto& d : dets) slot.push_back(parse_detection(d));
          }
          break;
        case BackendKind::kFrameEmbedder:
          cfg.fixtures.frame_vectors = fixtures.get<std::map<std::string, std::vector<double>>>();
          break;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("backend config: ") + e.what());
  }
  return cfg;
}

std::string describe_backend_config(const BackendConfig& config) {
  json out;
  out["seed"] = config.seed;
  for (auto kind : kAllKinds) {
    const auto key = std::string(to_string(kind));
    if (auto it = config.endpoints.find(kind); it != config.endpoints.end()) {
      out[key] = {{"type", "endpoint"},
                  {"url", it->second.base_url},
                  {"model", it->second.model},
                  {"version", it->second.version}};
      continue;
    }
    json node = {{"type", "mock"}};
    switch (kind) {
      case BackendKind::kCaptioner: node["fixtures"] = config.fixtures.captions.size(); break;
      case BackendKind::kTextEmbedder:
        node["dim"] = config.text_dim;
        node["fixtures"] = config.fixtures.text_vectors.size();
        break;
      case BackendKind::kObjectExtractor: break;
      case BackendKind::kDetector:
        node["synthesize"] = config.synthesize_detections;
        node["fixtures"] = config.fixtures.detections.size();
        break;
      case BackendKind::kFrameEmbedder: node["fixtures"] = config.fixtures.frame_vectors.size(); break;
    }
    out[key] = node;
  }
  return out.dump();
}

BackendSet make_backends(const BackendConfig& config) {
  BackendSet set;
  auto endpoint = [&](BackendKind k) -> const EndpointOptions* {
    auto it = config.endpoints.find(k);
    return it == config.endpoints.end() ? nullptr : &it->second;
  };
  if (auto* e = endpoint(BackendKind::kCaptioner)) {
    set.captioner = make_endpoint_captioner(*e);
  } else {
    set.captioner = std::make_unique<MockCaptioner>(config.fixtures.captions);
  }
  if (auto* e = endpoint(BackendKind::kTextEmbedder)) {
    set.text_embedder = make_endpoint_text_embedder(*e);
  } else {
    set.text_embedder = std::make_unique<MockTextEmbedder>(config.seed, config.text_dim, config.fixtures.text_vectors);
  }
  if (auto* e = endpoint(BackendKind::kObjectExtractor)) {
    set.object_extractor = make_endpoint_object_extractor(*e);
  } else {
    set.object_extractor = std::make_unique<MockObjectExtractor>();
  }
  if (auto* e = endpoint(BackendKind::kDetector)) {
    set.detector = make_endpoint_detector(*e);
  } else {
    set.detector = std::make_unique<MockDetector>(config.seed, config.synthesize_detections, config.fixtures.detections);
  }
  if (auto* e = endpoint(BackendKind::kFrameEmbedder)) {
    set.frame_embedder = make_endpoint_frame_embedder(*e);
  } else {
    set.frame_embedder = std::make_unique<MockFrameEmbedder>(config.seed, config.fixtures.frame_vectors);
  }
  return set;
}

}  // namespace sstem
