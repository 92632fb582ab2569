#include "note_forge/demo_service.hpp"

#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "note_forge/serialize.hpp"

namespace note_forge {

struct DemoService::Impl {
  DemoServiceConfig config;
  std::vector<DemoPatient> patients;
  std::map<std::string, SequentialRecord> records;  // by patient id, built at startup
  std::unique_ptr<ModelGateway> gateway;

  std::mutex sessions_mutex;
  std::map<std::string, std::map<std::string, SequentialRecord>> sessions;

  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string host;
  bool running = false;

  void load();
  void install();
  void bind(int requested_port, const std::string& bind_host);
};

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, Json{{"error", {{"code", code}, {"message", message}}}});
}

std::string session_of(const httplib::Request& req) {
  const std::string id = req.get_header_value("X-Session-Id");
  return id.empty() ? "default" : id;
}

}  // namespace

void DemoService::Impl::load() {
  const std::vector<Json> manifest = [&] {
    const Json j = Json::parse(read_text_file(config.demo_dir / "patients.json"));
    if (!j.is_array()) throw ValidationError("patients.json must hold an array");
    return std::vector<Json>(j.begin(), j.end());
  }();
  const EmrTables tables = load_emr_directory(config.demo_dir);
  const CohortArtifacts cohort = select_cohort_stage(tables, config.cohort, config.vocabulary);
  const std::vector<SequentialRecord> built = build_sequential_dataset(tables, cohort);
  std::map<HadmId, const SequentialRecord*> by_hadm;
  for (const SequentialRecord& r : built) by_hadm.emplace(r.hadm_id, &r);

  for (const Json& entry : manifest) {
    DemoPatient p;
    p.id = entry.at("id").get<std::string>();
    p.label = entry.at("label").get<std::string>();
    p.hadm_id = entry.at("hadm_id").get<HadmId>();
    auto it = by_hadm.find(p.hadm_id);
    if (it == by_hadm.end()) {
      throw ValidationError("demo patient " + p.id + " (hadm_id " + std::to_string(p.hadm_id) +
                            ") is not in the demo cohort");
    }
    p.subject_id = it->second->subject_id;
    records.emplace(p.id, *it->second);
    patients.push_back(std::move(p));
  }
  gateway = make_gateway(config.gateway, config.mock);
}

void DemoService::Impl::install() {
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Session-Id");
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, Json{{"status", "ok"}, {"patients", patients.size()}});
  });

  server.Get("/api/patients", [this](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const DemoPatient& p : patients) {
      out.push_back({{"id", p.id}, {"label", p.label}, {"subject_id", p.subject_id}, {"hadm_id", p.hadm_id}});
    }
    send_json(res, 200, out);
  });

  server.Post(R"(/api/patients/([^/]+)/sequential)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto it = records.find(id);
    if (it == records.end()) return send_error(res, 404, "unknown_patient", "no demo patient '" + id + "'");
    const SequentialRecord& r = it->second;
    {
      std::lock_guard lock(sessions_mutex);
      sessions[session_of(req)].insert_or_assign(id, r);
    }
    Json events = Json::array();
    for (const TimelineEvent& e : r.events) {
      events.push_back({{"ts", format_timestamp(e.timestamp)}, {"kind", to_string(e.kind)}, {"text", e.text}});
    }
    send_json(res, 200, Json{{"id", id},
                             {"hadm_id", r.hadm_id},
                             {"header", header_lines(r)},
                             {"events", std::move(events)},
                             {"sequential_dataset", render_input(r, InputVariant::table_and_text)}});
  });

  server.Post(R"(/api/patients/([^/]+)/summary)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!records.contains(id)) return send_error(res, 404, "unknown_patient", "no demo patient '" + id + "'");
    std::optional<SequentialRecord> record;
    {
      std::lock_guard lock(sessions_mutex);
      auto s = sessions.find(session_of(req));
      if (s != sessions.end()) {
        auto r = s->second.find(id);
        if (r != s->second.end()) record = r->second;
      }
    }
    if (!record) {
      return send_error(res, 409, "sequential_required",
                        "generate the sequential dataset for '" + id + "' before requesting a summary");
    }
    try {
      const std::string summary = gateway->generate(render_instruction(*record), config.generation);
      send_json(res, 200, Json{{"id", id}, {"hadm_id", record->hadm_id}, {"summary", summary}});
    } catch (const GatewayError& e) {
      send_error(res, 502, "gateway_error", e.what());
    }
  });

  server.Post("/api/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error&) {
      return send_error(res, 400, "bad_request", "body is not JSON");
    }
    if (!body.is_object() || !body.contains("reference") || !body.contains("hypothesis") ||
        !body["reference"].is_string() || !body["hypothesis"].is_string()) {
      return send_error(res, 400, "bad_request", "expected {\"reference\": string, \"hypothesis\": string}");
    }
    EvaluationOptions options = config.evaluation;
    if (body.value("lexical_only", false)) options = EvaluationOptions::lexical_only();
    try {
      const MetricReport report =
          evaluate_pair(body["reference"].get<std::string>(), body["hypothesis"].get<std::string>(), gateway.get(),
                        options, body.value("pair_id", std::string()));
      send_json(res, 200, to_json(report));
    } catch (const GatewayError& e) {
      send_error(res, 502, "gateway_error", e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, "bad_request", e.what());
    }
  });
}

void DemoService::Impl::bind(int requested_port, const std::string& bind_host) {
  if (running) throw ValidationError("demo service is already running");
  host = bind_host;
  if (requested_port == 0) {
    port = server.bind_to_any_port(bind_host);
    if (port <= 0) throw IoError("demo service could not bind any port on " + bind_host);
  } else {
    if (!server.bind_to_port(bind_host, requested_port)) {
      throw IoError("demo service port " + std::to_string(requested_port) + " on " + bind_host + " is busy");
    }
    port = requested_port;
  }
  running = true;
}

DemoService::DemoService(DemoServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->load();
  // Without SO_REUSEPORT so that binding a busy port fails.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->install();
}

DemoService::~DemoService() { stop(); }

const std::vector<DemoPatient>& DemoService::patients() const { return impl_->patients; }

void DemoService::start(int port, const std::string& host) {
  impl_->bind(port, host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void DemoService::run(int port, const std::string& host) {
  impl_->bind(port, host);
  impl_->server.listen_after_bind();
  impl_->running = false;
}

void DemoService::stop() {
  if (!impl_) return;
  if (impl_->running) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->running = false;
}

int DemoService::port() const { return impl_->port; }

std::string DemoService::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

}  // namespace note_forge
