#include "service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <stdexcept>

#include "interimkm/interimkm.h"

namespace interimkm::service {

namespace {

using ordered = nlohmann::ordered_json;

int http_status(ikm_status s) {
  switch (s) {
    case IKM_OK: return 200;
    case IKM_ERR_INVALID_ARGUMENT:
    case IKM_ERR_INVALID_CONFIG: return 400;
    case IKM_ERR_DOMAIN:
    case IKM_ERR_SIMULATION: return 422;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, ikm_status s) {
  send_json(res, http_status(s), std::string(ikm_last_error_json()) + "\n");
}

bool flag(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) return false;
  const auto v = req.get_param_value(name);
  return v.empty() || v == "1" || v == "true";
}

// Stateless computations: the body is a scenario config.
template <class Call>
void run_report(const httplib::Request& req, httplib::Response& res, Call&& call) {
  ikm_result* result = nullptr;
  const ikm_status s = call(req.body.c_str(), &result);
  if (s != IKM_OK) {
    send_error(res, s);
    return;
  }
  send_json(res, 200, ikm_result_json(result));
  ikm_result_free(result);
}

}  // namespace

BindAddress parse_bind_address(const std::string& text) {
  BindAddress out;
  std::string port = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    if (colon > 0) out.host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || value < 0 || value > 65535) {
    throw std::invalid_argument("bad bind address \"" + text + "\"; expected host:port");
  }
  out.port = value;
  return out;
}

Service::Service(ServiceOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() {
  stop();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

bool Service::listen(const BindAddress& address) {
  return server_->listen(address.host, address.port);
}

int Service::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

void Service::routes() {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  srv.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
    ordered j;
    j["status"] = "ok";
    j["version"] = ikm_version();
    send_json(res, 200, j.dump() + "\n");
  });

  srv.Post("/api/v1/design", [](const httplib::Request& req, httplib::Response& res) {
    run_report(req, res, [](const char* body, ikm_result** out) { return ikm_design_json(body, out); });
  });

  srv.Post("/api/v1/interval", [](const httplib::Request& req, httplib::Response& res) {
    ikm_run_options opts;
    ikm_run_options_init(&opts);
    opts.clip_bounds = flag(req, "clip_bounds") ? 1 : 0;
    run_report(req, res, [&](const char* body, ikm_result** out) {
      return ikm_plan_json(body, &opts, out);
    });
  });

  srv.Post("/api/v1/simulate", [this](const httplib::Request& req, httplib::Response& res) {
    ikm_run_options opts;
    ikm_run_options_init(&opts);
    opts.max_replicates = options_.max_replicates;
    long long total = 0;
    const ikm_status s = ikm_requested_replicates(req.body.c_str(), &opts, &total);
    if (s != IKM_OK) {
      send_error(res, s);
      return;
    }
    if (total > options_.max_replicates) {
      ordered j;
      j["status"] = "invalid_config";
      j["error"] = "invalid_config";
      j["message"] = "request asks for " + std::to_string(total) +
                     " replicates, above the cap of " + std::to_string(options_.max_replicates);
      j["diagnostics"] = ordered::array({{{"path", "/replicates"}, {"message", j["message"]}}});
      send_json(res, 400, j.dump() + "\n");
      return;
    }
    const std::string id = start_job(req.body, static_cast<int>(total));
    ordered j;
    j["job"] = id;
    j["status"] = "running";
    j["location"] = "/api/v1/simulate/" + id;
    res.set_header("Location", "/api/v1/simulate/" + id);
    send_json(res, 202, j.dump() + "\n");
  });

  srv.Get(R"(/api/v1/simulate/([A-Za-z0-9-]+)/result)",
          [this](const httplib::Request& req, httplib::Response& res) {
            std::shared_ptr<Job> job;
            {
              std::lock_guard lock(jobs_mutex_);
              const auto it = jobs_.find(req.matches[1]);
              if (it != jobs_.end()) job = it->second;
            }
            if (!job) {
              send_json(res, 404, R"({"error":"unknown_job"})" "\n");
              return;
            }
            std::lock_guard lock(jobs_mutex_);
            if (job->status == "done") send_json(res, 200, job->result);
            else if (job->status == "failed") send_json(res, 422, job->error + "\n");
            else send_json(res, 409, R"({"error":"job_running"})" "\n");
          });

  srv.Get(R"(/api/v1/simulate/([A-Za-z0-9-]+))",
          [this](const httplib::Request& req, httplib::Response& res) {
            bool found = false;
            const std::string body = job_status(req.matches[1], found);
            send_json(res, found ? 200 : 404, body);
          });

  if (!options_.ui_dir.empty()) srv.set_mount_point("/", options_.ui_dir);
}

std::string Service::start_job(const std::string& body, int total) {
  auto job = std::make_shared<Job>();
  job->total = total;
  std::string id;
  {
    std::lock_guard lock(jobs_mutex_);
    id = "job-" + std::to_string(next_job_++);
    jobs_[id] = job;
  }
  struct Progress {
    Service* self;
    Job* job;
  };
  std::lock_guard lock(jobs_mutex_);
  workers_.emplace_back([this, job, body] {
    ikm_run_options opts;
    ikm_run_options_init(&opts);
    opts.max_replicates = options_.max_replicates;
    opts.threads = options_.threads;
    Progress progress{this, job.get()};
    ikm_result* result = nullptr;
    const ikm_status s = ikm_simulate_json(
        body.c_str(), &opts,
        [](int done, int, void* user) {
          auto* p = static_cast<Progress*>(user);
          std::lock_guard lock(p->self->jobs_mutex_);
          p->job->done = done;
        },
        &progress, &result);
    std::lock_guard lock(jobs_mutex_);
    if (s == IKM_OK) {
      job->status = "done";
      job->done = job->total;
      job->result = ikm_result_json(result);
      job->passed = ikm_result_passed(result) != 0;
      ikm_result_free(result);
    } else {
      job->status = "failed";
      job->error = ikm_last_error_json();
    }
  });
  return id;
}

std::string Service::job_status(const std::string& id, bool& found) {
  std::lock_guard lock(jobs_mutex_);
  const auto it = jobs_.find(id);
  found = it != jobs_.end();
  if (!found) return R"({"error":"unknown_job"})" "\n";
  const Job& job = *it->second;
  ordered j;
  j["job"] = id;
  j["status"] = job.status;
  j["done"] = job.done;
  j["total"] = job.total;
  if (job.status == "done") {
    j["pass"] = job.passed;
    j["result"] = ordered::parse(job.result);
  } else if (job.status == "failed") {
    j["error"] = ordered::parse(job.error);
  }
  return j.dump() + "\n";
}

}  // namespace interimkm::service
