#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "note_forge/error.hpp"
#include "note_forge/metrics.hpp"

namespace note_forge {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8088";
  std::optional<std::string> api_key;
  std::string model_name = "mistral-7b-instruct";
  double timeout_seconds = 60;
  int max_parallel = 4;
  // Full request/response payloads (patient text) are logged only when set.
  bool log_payloads = false;

  void validate() const;

  // Reads NOTE_GATEWAY_URL and NOTE_GATEWAY_KEY over the given defaults.
  static EndpointConfig from_env(EndpointConfig defaults);
  static EndpointConfig from_env();
};

struct GenerationParams {
  int max_new_tokens = 512;
  double temperature = 0;
  std::optional<std::uint64_t> seed;

  void validate() const;
};

enum class Capability { generate, logprobs, logits, embeddings };

inline constexpr Capability kAllCapabilities[] = {Capability::generate, Capability::logprobs, Capability::logits,
                                                  Capability::embeddings};

std::string_view to_string(Capability c);
std::optional<Capability> parse_capability(std::string_view s);

struct Capabilities {
  std::set<Capability> supported;
  int vocab_size = 0;
  int embedding_dim = 0;

  bool has(Capability c) const { return supported.contains(c); }
};

class GatewayError : public IoError {
 public:
  enum class Kind { transport, http, malformed, capability };

  GatewayError(Kind kind, std::string message, int status = 0)
      : IoError(std::move(message)), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  // HTTP status for Kind::http, 0 otherwise.
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

class ModelGateway {
 public:
  virtual ~ModelGateway() = default;

  virtual Capabilities capabilities() = 0;
  virtual std::string generate(std::string_view prompt, const GenerationParams& params) = 0;
  // Natural-log probability of every token after the first.
  virtual std::vector<double> logprobs(std::string_view text) = 0;
  // One row per token, one column per vocabulary entry.
  virtual Matrix<double> logits(std::string_view text) = 0;
  // One unit-norm row per token.
  virtual Matrix<double> embed(const std::vector<std::string>& tokens) = 0;
};

// JSON over HTTP client for the /v1 routes. Safe to share between threads; at most
// max_parallel requests are in flight at once.
class HttpGateway final : public ModelGateway {
 public:
  explicit HttpGateway(EndpointConfig config);
  ~HttpGateway() override;

  Capabilities capabilities() override;
  std::string generate(std::string_view prompt, const GenerationParams& params) override;
  std::vector<double> logprobs(std::string_view text) override;
  Matrix<double> logits(std::string_view text) override;
  Matrix<double> embed(const std::vector<std::string>& tokens) override;

  const EndpointConfig& config() const { return config_; }

 private:
  struct State;

  void require(Capability c);
  std::string post(std::string_view route, std::string body, std::string_view summary);
  std::string get(std::string_view route);

  EndpointConfig config_;
  std::unique_ptr<State> state_;
};

enum class LogprobMode { uniform, hashed };

// Deterministic behaviour of the mock model server. All values derive from
// mock_unit(), a 64-bit FNV-1a hash passed through the splitmix64 finalizer and
// mapped to [0, 1).
struct MockRules {
  std::uint64_t seed = 0;
  int vocab_size = 50;
  int embedding_dim = 16;
  LogprobMode logprob_mode = LogprobMode::uniform;
  std::set<Capability> capabilities{std::begin(kAllCapabilities), std::end(kAllCapabilities)};
  // Artificial per-request delay, used to observe concurrency.
  int latency_ms = 0;
};

inline constexpr std::string_view kMockFailMarker = "[[mock-fail]]";

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
double mock_unit(std::uint64_t seed, std::initializer_list<std::string_view> parts);

std::string mock_generate(const MockRules& rules, std::string_view prompt, const GenerationParams& params);
std::vector<double> mock_logprobs(const MockRules& rules, const TokenSequence& tokens);
Matrix<double> mock_logits(const MockRules& rules, const TokenSequence& tokens);
Vector<double> mock_embedding(const MockRules& rules, std::string_view token);

// In-process gateway applying MockRules directly, without HTTP.
class MockGateway final : public ModelGateway {
 public:
  explicit MockGateway(MockRules rules = {}) : rules_(std::move(rules)) {}

  Capabilities capabilities() override;
  std::string generate(std::string_view prompt, const GenerationParams& params) override;
  std::vector<double> logprobs(std::string_view text) override;
  Matrix<double> logits(std::string_view text) override;
  Matrix<double> embed(const std::vector<std::string>& tokens) override;

 private:
  void require(Capability c) const;
  MockRules rules_;
};

struct MockStats {
  int in_flight = 0;
  int max_in_flight = 0;
  std::uint64_t requests = 0;
};

class MockServer {
 public:
  explicit MockServer(MockRules rules = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Port 0 picks a free port. Throws IoError when the port is busy.
  void start(int port = 0, const std::string& host = "127.0.0.1");
  // Blocks until stop() is called from another thread.
  void run(int port, const std::string& host = "127.0.0.1");
  void stop();

  int port() const;
  std::string url() const;
  MockStats stats() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace note_forge
