#include "note_forge/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <regex>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "note_forge/judge.hpp"
#include "note_forge/log.hpp"
#include "note_forge/strings.hpp"

namespace note_forge {

using json = nlohmann::json;

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("gateway base_url is empty");
  if (base_url != "mock" && !base_url.starts_with("http://") && !base_url.starts_with("https://")) {
    throw ValidationError("gateway base_url '" + base_url + "' must be http(s)://... or mock");
  }
  if (!(timeout_seconds > 0)) throw ValidationError("gateway timeout must be positive");
  if (max_parallel < 1) throw ValidationError("gateway max_parallel must be >= 1");
}

EndpointConfig EndpointConfig::from_env(EndpointConfig defaults) {
  if (const char* url = std::getenv("NOTE_GATEWAY_URL"); url != nullptr && *url != '\0') defaults.base_url = url;
  if (const char* key = std::getenv("NOTE_GATEWAY_KEY"); key != nullptr && *key != '\0') defaults.api_key = key;
  return defaults;
}

EndpointConfig EndpointConfig::from_env() { return from_env(EndpointConfig{}); }

void GenerationParams::validate() const {
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be >= 1");
  if (!(temperature >= 0)) throw ValidationError("temperature must be >= 0");
}

std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::generate: return "generate";
    case Capability::logprobs: return "logprobs";
    case Capability::logits: return "logits";
    case Capability::embeddings: return "embeddings";
  }
  return "";
}

std::optional<Capability> parse_capability(std::string_view s) {
  for (Capability c : kAllCapabilities) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

// ---- HTTP client ----

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?)://([^/\s]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) throw ValidationError("gateway URL '" + url + "' is not http(s)://host[:port][/path]");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") {
    throw ValidationError("https gateway URLs need a build with NOTE_FORGE_WITH_OPENSSL=ON");
  }
#endif
  ParsedUrl out{m[1].str() + "://" + m[2].str(), m[3].matched ? m[3].str() : ""};
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

json parse_body(const std::string& body, std::string_view route) {
  try {
    return json::parse(body);
  } catch (const json::parse_error&) {
    throw GatewayError(GatewayError::Kind::malformed, "gateway response from " + std::string(route) + " is not JSON");
  }
}

template <typename T>
T field(const json& j, const char* name, std::string_view route) {
  if (!j.is_object() || !j.contains(name)) {
    throw GatewayError(GatewayError::Kind::malformed,
                       "gateway response from " + std::string(route) + " lacks field '" + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw GatewayError(GatewayError::Kind::malformed,
                       "gateway response from " + std::string(route) + " has a malformed '" + name + "'");
  }
}

Matrix<double> to_matrix(const std::vector<std::vector<double>>& rows, std::size_t width, std::string_view route) {
  Matrix<double> m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw GatewayError(GatewayError::Kind::malformed, "gateway response from " + std::string(route) + " row " +
                                                            std::to_string(i) + " has width " +
                                                            std::to_string(rows[i].size()) + ", expected " +
                                                            std::to_string(width));
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw GatewayError(GatewayError::Kind::malformed, "gateway response from " + std::string(route) +
                                                              " contains a non-finite value");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string error_message(const httplib::Result& res) {
  try {
    const json j = json::parse(res->body);
    if (j.contains("error") && j["error"].contains("message")) return j["error"]["message"].get<std::string>();
  } catch (const json::exception&) {
  }
  return res->body.substr(0, 200);
}

}  // namespace

struct HttpGateway::State {
  explicit State(int slots) : semaphore(slots) {}

  ParsedUrl url;
  std::counting_semaphore<> semaphore;
  std::mutex caps_mutex;
  std::optional<Capabilities> caps;
  std::atomic<std::uint64_t> counter{0};
  std::string id_prefix;
};

HttpGateway::HttpGateway(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  state_ = std::make_unique<State>(config_.max_parallel);
  state_->url = parse_url(config_.base_url);
  std::random_device rd;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08x%08x", rd(), rd());
  state_->id_prefix = buf;
}

HttpGateway::~HttpGateway() = default;

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

constexpr int kAttempts = 3;

}  // namespace

std::string HttpGateway::get(std::string_view route) {
  return post(route, "", "");
}

// Empty body means GET.
std::string HttpGateway::post(std::string_view route, std::string body, std::string_view summary) {
  const std::string path = state_->url.prefix + std::string(route);
  const bool is_get = body.empty();
  SlotGuard slot(state_->semaphore);
  for (int attempt = 1;; ++attempt) {
    httplib::Client client(state_->url.origin);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (config_.api_key) client.set_bearer_token_auth(*config_.api_key);

    const auto started = std::chrono::steady_clock::now();
    httplib::Result res = is_get ? client.Get(path) : client.Post(path, body, "application/json");
    const auto latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

    if (!res) {
      const std::string reason = httplib::to_string(res.error());
      log::warn("gateway " + path + " attempt " + std::to_string(attempt) + " failed: " + reason);
      if (attempt >= kAttempts) {
        throw GatewayError(GatewayError::Kind::transport,
                           "cannot reach gateway at " + config_.base_url + path + ": " + reason);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
      continue;
    }
    log::info("gateway " + path + " " + std::string(summary) + " status=" + std::to_string(res->status) +
              " latency_ms=" + std::to_string(latency) + " bytes=" + std::to_string(res->body.size()));
    if (config_.log_payloads) {
      log::debug("gateway request " + path + ": " + body);
      log::debug("gateway response " + path + ": " + res->body);
    }
    if (res->status != 200) {
      throw GatewayError(GatewayError::Kind::http,
                         "gateway " + path + " returned HTTP " + std::to_string(res->status) + ": " + error_message(res),
                         res->status);
    }
    return res->body;
  }
}

Capabilities HttpGateway::capabilities() {
  std::lock_guard lock(state_->caps_mutex);
  if (state_->caps) return *state_->caps;
  const json j = parse_body(get("/v1/capabilities"), "/v1/capabilities");
  Capabilities caps;
  for (const std::string& name : field<std::vector<std::string>>(j, "capabilities", "/v1/capabilities")) {
    if (auto c = parse_capability(name)) caps.supported.insert(*c);
  }
  if (j.contains("vocab_size")) caps.vocab_size = field<int>(j, "vocab_size", "/v1/capabilities");
  if (j.contains("embedding_dim")) caps.embedding_dim = field<int>(j, "embedding_dim", "/v1/capabilities");
  state_->caps = caps;
  return caps;
}

void HttpGateway::require(Capability c) {
  if (!capabilities().has(c)) {
    throw GatewayError(GatewayError::Kind::capability,
                       "gateway at " + config_.base_url + " does not support " + std::string(to_string(c)) +
                           (c == Capability::logits ? " (use the mock or a local server exposing logits)" : ""));
  }
}

std::string HttpGateway::generate(std::string_view prompt, const GenerationParams& params) {
  params.validate();
  require(Capability::generate);
  const std::string id = state_->id_prefix + "-" + std::to_string(state_->counter.fetch_add(1));
  json req{{"model", config_.model_name},
           {"prompt", prompt},
           {"max_new_tokens", params.max_new_tokens},
           {"temperature", params.temperature},
           {"request_id", id}};
  req["seed"] = params.seed ? json(*params.seed) : json(nullptr);
  const json j = parse_body(post("/v1/generate", req.dump(), "request_id=" + id + " prompt_bytes=" +
                                                                 std::to_string(prompt.size())),
                            "/v1/generate");
  return field<std::string>(j, "text", "/v1/generate");
}

std::vector<double> HttpGateway::logprobs(std::string_view text) {
  if (trim(text).empty()) throw ValidationError("logprobs needs non-empty text");
  require(Capability::logprobs);
  const std::string id = state_->id_prefix + "-" + std::to_string(state_->counter.fetch_add(1));
  json req{{"model", config_.model_name}, {"text", text}, {"request_id", id}};
  const json j = parse_body(post("/v1/logprobs", req.dump(), "request_id=" + id), "/v1/logprobs");
  const auto tokens = field<std::vector<std::string>>(j, "tokens", "/v1/logprobs");
  auto values = field<std::vector<double>>(j, "logprobs", "/v1/logprobs");
  if (tokens.size() != values.size()) {
    throw GatewayError(GatewayError::Kind::malformed, "gateway /v1/logprobs returned mismatched tokens and logprobs");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v > 0) {
      throw GatewayError(GatewayError::Kind::malformed, "gateway /v1/logprobs returned an invalid log-probability");
    }
  }
  return values;
}

Matrix<double> HttpGateway::logits(std::string_view text) {
  if (trim(text).empty()) throw ValidationError("logits needs non-empty text");
  require(Capability::logits);
  const std::string id = state_->id_prefix + "-" + std::to_string(state_->counter.fetch_add(1));
  json req{{"model", config_.model_name}, {"text", text}, {"request_id", id}};
  const json j = parse_body(post("/v1/logits", req.dump(), "request_id=" + id), "/v1/logits");
  const auto tokens = field<std::vector<std::string>>(j, "tokens", "/v1/logits");
  const auto width = field<std::size_t>(j, "vocab_size", "/v1/logits");
  const auto rows = field<std::vector<std::vector<double>>>(j, "logits", "/v1/logits");
  if (rows.size() != tokens.size()) {
    throw GatewayError(GatewayError::Kind::malformed, "gateway /v1/logits returned one row per token mismatch");
  }
  return to_matrix(rows, width, "/v1/logits");
}

Matrix<double> HttpGateway::embed(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ValidationError("embed needs at least one token");
  require(Capability::embeddings);
  const std::string id = state_->id_prefix + "-" + std::to_string(state_->counter.fetch_add(1));
  json req{{"model", config_.model_name}, {"tokens", tokens}, {"request_id", id}};
  const json j = parse_body(post("/v1/embeddings", req.dump(), "request_id=" + id), "/v1/embeddings");
  const auto dim = field<std::size_t>(j, "dim", "/v1/embeddings");
  const auto rows = field<std::vector<std::vector<double>>>(j, "embeddings", "/v1/embeddings");
  if (rows.size() != tokens.size()) {
    throw GatewayError(GatewayError::Kind::malformed, "gateway /v1/embeddings returned the wrong number of vectors");
  }
  Matrix<double> m = to_matrix(rows, dim, "/v1/embeddings");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) > 1e-6) {
      throw GatewayError(GatewayError::Kind::malformed, "gateway /v1/embeddings returned a non-unit vector");
    }
  }
  return m;
}

// ---- mock rules ----

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double mock_unit(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  std::uint64_t h = fnv1a64(std::string_view(seed_bytes, 8));
  for (std::string_view p : parts) {
    h = fnv1a64(p, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  // splitmix64 finalizer: FNV-1a alone leaves the top bits nearly equal for
  // inputs differing in their last byte.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

std::string first_words(std::string_view text, int limit) {
  int words = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    if (words == limit) return std::string(trim(text.substr(0, i)));
    ++words;
    while (i < text.size() && !is_space(text[i])) ++i;
  }
  return std::string(trim(text));
}

std::string mock_judge_transcript(const MockRules& rules, std::string_view prompt) {
  JudgeScorecard card;
  for (Criterion c : kAllCriteria) {
    const double u = mock_unit(rules.seed, {"judge", to_string(c), prompt});
    const int score = std::min(kMaxCriterionScore, static_cast<int>(u * (kMaxCriterionScore + 1)));
    card.scores[static_cast<std::size_t>(c)] = score;
    card.total += score;
    card.justifications[static_cast<std::size_t>(c)] = "Deterministic mock assessment.";
  }
  card.stated_total = card.total;
  return format_scorecard(card);
}

}  // namespace

std::string mock_generate(const MockRules& rules, std::string_view prompt, const GenerationParams& params) {
  if (prompt.find(kScoreSummaryLabel) != std::string_view::npos) return mock_judge_transcript(rules, prompt);
  constexpr std::string_view kEcho = "echo: ";
  std::string_view body = prompt;
  if (body.starts_with(kEcho)) body.remove_prefix(kEcho.size());
  return first_words(body, params.max_new_tokens);
}

std::vector<double> mock_logprobs(const MockRules& rules, const TokenSequence& tokens) {
  std::vector<double> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (rules.logprob_mode == LogprobMode::uniform) {
      out.push_back(std::log(1.0 / rules.vocab_size));
    } else {
      const double p = 0.01 + 0.98 * mock_unit(rules.seed, {"logprob", tokens[i - 1], tokens[i]});
      out.push_back(std::log(p));
    }
  }
  return out;
}

Matrix<double> mock_logits(const MockRules& rules, const TokenSequence& tokens) {
  Matrix<double> m(static_cast<Eigen::Index>(tokens.size()), rules.vocab_size);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (int j = 0; j < rules.vocab_size; ++j) {
      m(static_cast<Eigen::Index>(i), j) = 8.0 * mock_unit(rules.seed, {"logit", tokens[i], std::to_string(j)}) - 4.0;
    }
  }
  return m;
}

Vector<double> mock_embedding(const MockRules& rules, std::string_view token) {
  Vector<double> v(rules.embedding_dim);
  for (int k = 0; k < rules.embedding_dim; ++k) {
    v(k) = 2.0 * mock_unit(rules.seed, {"embed", token, std::to_string(k)}) - 1.0;
  }
  const double norm = v.norm();
  if (norm == 0) {
    v.setZero();
    v(0) = 1;
    return v;
  }
  return v / norm;
}

Capabilities MockGateway::capabilities() { return {rules_.capabilities, rules_.vocab_size, rules_.embedding_dim}; }

void MockGateway::require(Capability c) const {
  if (!rules_.capabilities.contains(c)) {
    throw GatewayError(GatewayError::Kind::capability, "mock gateway does not support " + std::string(to_string(c)));
  }
}

std::string MockGateway::generate(std::string_view prompt, const GenerationParams& params) {
  params.validate();
  require(Capability::generate);
  if (prompt.find(kMockFailMarker) != std::string_view::npos) {
    throw GatewayError(GatewayError::Kind::http, "mock gateway failure requested", 500);
  }
  return mock_generate(rules_, prompt, params);
}

std::vector<double> MockGateway::logprobs(std::string_view text) {
  if (trim(text).empty()) throw ValidationError("logprobs needs non-empty text");
  require(Capability::logprobs);
  return mock_logprobs(rules_, tokenize(text));
}

Matrix<double> MockGateway::logits(std::string_view text) {
  if (trim(text).empty()) throw ValidationError("logits needs non-empty text");
  require(Capability::logits);
  return mock_logits(rules_, tokenize(text));
}

Matrix<double> MockGateway::embed(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ValidationError("embed needs at least one token");
  require(Capability::embeddings);
  Matrix<double> m(static_cast<Eigen::Index>(tokens.size()), rules_.embedding_dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = mock_embedding(rules_, tokens[i]);
  return m;
}

// ---- mock server ----

struct MockServer::Impl {
  MockRules rules;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string host;
  std::atomic<bool> running{false};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
  std::atomic<std::uint64_t> requests{0};

  void install();
  void bind(int requested_port, const std::string& bind_host);
};

namespace {

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), "application/json");
}

json capabilities_json(const MockRules& rules) {
  json names = json::array();
  for (Capability c : kAllCapabilities) {
    if (rules.capabilities.contains(c)) names.push_back(to_string(c));
  }
  return json{{"capabilities", names},
              {"vocab_size", rules.vocab_size},
              {"embedding_dim", rules.embedding_dim},
              {"model", "note-forge-mock"}};
}

json embeddings_json(const Matrix<double>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void MockServer::Impl::install() {
  auto counted = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const int now = ++in_flight;
      int seen = max_in_flight.load();
      while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
      }
      if (rules.latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(rules.latency_ms));
      try {
        handler(req, res);
      } catch (const json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const std::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      }
      --in_flight;
    };
  };
  auto body_of = [](const httplib::Request& req) { return json::parse(req.body); };
  auto allowed = [this](Capability c, httplib::Response& res) {
    if (rules.capabilities.contains(c)) return true;
    send_error(res, 501, "unsupported_capability", std::string(to_string(c)) + " is disabled on this server");
    return false;
  };

  auto caps = [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(capabilities_json(rules).dump(), "application/json");
  };
  server.Get("/v1/capabilities", caps);
  server.Get("/health", caps);
  server.Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"in_flight", in_flight.load()},
                         {"max_in_flight", max_in_flight.load()},
                         {"requests", requests.load()}}
                        .dump(),
                    "application/json");
  });

  server.Post("/v1/generate", counted([=, this](const httplib::Request& req, httplib::Response& res) {
    if (!allowed(Capability::generate, res)) return;
    const json body = body_of(req);
    const std::string prompt = body.at("prompt").get<std::string>();
    GenerationParams params;
    params.max_new_tokens = body.value("max_new_tokens", 512);
    params.temperature = body.value("temperature", 0.0);
    params.validate();
    if (prompt.find(kMockFailMarker) != std::string::npos) {
      send_error(res, 500, "mock_failure", "failure requested by prompt marker");
      return;
    }
    json out{{"text", mock_generate(rules, prompt, params)},
             {"model", body.value("model", std::string("note-forge-mock"))},
             {"request_id", body.value("request_id", std::string())}};
    res.set_content(out.dump(), "application/json");
  }));

  server.Post("/v1/logprobs", counted([=, this](const httplib::Request& req, httplib::Response& res) {
    if (!allowed(Capability::logprobs, res)) return;
    const json body = body_of(req);
    const TokenSequence tokens = tokenize(body.at("text").get<std::string>());
    const std::vector<std::string> scored(tokens.tokens().begin() + (tokens.empty() ? 0 : 1), tokens.tokens().end());
    json out{{"tokens", scored},
             {"logprobs", mock_logprobs(rules, tokens)},
             {"model", body.value("model", std::string("note-forge-mock"))},
             {"request_id", body.value("request_id", std::string())}};
    res.set_content(out.dump(), "application/json");
  }));

  server.Post("/v1/logits", counted([=, this](const httplib::Request& req, httplib::Response& res) {
    if (!allowed(Capability::logits, res)) return;
    const json body = body_of(req);
    const TokenSequence tokens = tokenize(body.at("text").get<std::string>());
    json out{{"tokens", tokens.tokens()},
             {"vocab_size", rules.vocab_size},
             {"logits", embeddings_json(mock_logits(rules, tokens))},
             {"model", body.value("model", std::string("note-forge-mock"))},
             {"request_id", body.value("request_id", std::string())}};
    res.set_content(out.dump(), "application/json");
  }));

  server.Post("/v1/embeddings", counted([=, this](const httplib::Request& req, httplib::Response& res) {
    if (!allowed(Capability::embeddings, res)) return;
    const json body = body_of(req);
    const auto tokens = body.at("tokens").get<std::vector<std::string>>();
    Matrix<double> m(static_cast<Eigen::Index>(tokens.size()), rules.embedding_dim);
    for (std::size_t i = 0; i < tokens.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = mock_embedding(rules, tokens[i]);
    json out{{"dim", rules.embedding_dim},
             {"embeddings", embeddings_json(m)},
             {"model", body.value("model", std::string("note-forge-mock"))},
             {"request_id", body.value("request_id", std::string())}};
    res.set_content(out.dump(), "application/json");
  }));
}

void MockServer::Impl::bind(int requested_port, const std::string& bind_host) {
  if (running) throw ValidationError("mock server is already running");
  host = bind_host;
  if (requested_port == 0) {
    port = server.bind_to_any_port(bind_host);
    if (port <= 0) throw IoError("mock server could not bind any port on " + bind_host);
  } else {
    if (!server.bind_to_port(bind_host, requested_port)) {
      throw IoError("mock server port " + std::to_string(requested_port) + " on " + bind_host + " is busy");
    }
    port = requested_port;
  }
  running = true;
}

MockServer::MockServer(MockRules rules) : impl_(std::make_unique<Impl>()) {
  impl_->rules = std::move(rules);
  // httplib's default also sets SO_REUSEPORT, which lets a second server share a busy port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->install();
}

MockServer::~MockServer() { stop(); }

void MockServer::start(int port, const std::string& host) {
  impl_->bind(port, host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockServer::run(int port, const std::string& host) {
  impl_->bind(port, host);
  impl_->server.listen_after_bind();
  impl_->running = false;
}

void MockServer::stop() {
  if (!impl_) return;
  if (impl_->running) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->running = false;
}

int MockServer::port() const { return impl_->port; }

std::string MockServer::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

MockStats MockServer::stats() const {
  return {impl_->in_flight.load(), impl_->max_in_flight.load(), impl_->requests.load()};
}

bool MockServer::running() const { return impl_->running; }

}  // namespace note_forge
