#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "note_forge/evaluate.hpp"
#include "note_forge/gateway.hpp"
#include "note_forge/pipeline.hpp"

namespace note_forge {

struct DemoPatient {
  std::string id;  // URL id, e.g. "demo-1"
  std::string label;
  SubjectId subject_id = 0;
  HadmId hadm_id = 0;
};

struct DemoServiceConfig {
  // MIMIC-shaped tables plus patients.json ({id, label, hadm_id} entries).
  std::filesystem::path demo_dir = "fixtures/demo";
  EndpointConfig gateway;
  MockRules mock;
  GenerationParams generation;
  CohortCriteria cohort;
  VocabularyThresholds vocabulary;
  EvaluationOptions evaluation;
};

// GET /api/health, GET /api/patients, POST /api/patients/{id}/sequential,
// POST /api/patients/{id}/summary, POST /api/evaluate. Sessions are keyed by the
// X-Session-Id header (a shared default session when absent).
class DemoService {
 public:
  explicit DemoService(DemoServiceConfig config);
  ~DemoService();
  DemoService(const DemoService&) = delete;
  DemoService& operator=(const DemoService&) = delete;

  const std::vector<DemoPatient>& patients() const;

  // Port 0 picks a free port. Throws IoError when the port is busy.
  void start(int port = 0, const std::string& host = "127.0.0.1");
  void run(int port, const std::string& host = "127.0.0.1");
  void stop();
  int port() const;
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace note_forge
