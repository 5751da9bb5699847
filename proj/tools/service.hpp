#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace interimkm::service {

struct ServiceOptions {
  int max_replicates = 5000;
  int threads = 0;
  std::string ui_dir;  // static files mounted at "/" when set
};

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Parses "host:port", ":port" or "port".
BindAddress parse_bind_address(const std::string& text);

/// HTTP front end over the C API. Jobs live in memory only.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Blocks until stop().
  bool listen(const BindAddress& address);
  /// Binds to an ephemeral port and returns it; then call listen_after_bind.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Job {
    std::string status = "running";
    int done = 0;
    int total = 0;
    std::string result;
    std::string error;
    bool passed = false;
  };

  void routes();
  std::string start_job(const std::string& body, int total);
  std::string job_status(const std::string& id, bool& found);

  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::thread> workers_;
  unsigned long long next_job_ = 1;
};

}  // namespace interimkm::service
