#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lecsum/catalog.hpp"

namespace httplib {
class Server;
}

namespace lecsum::server {

namespace fs = std::filesystem;

struct ServeConfig {
  fs::path root;
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> cors_allowlist;  // origins; "*" allows any
  fs::path ui_dir;                          // optional static mount at "/"
};

struct CatalogEntry {
  std::string video_id;
  fs::path dir;
  catalog::Manifest manifest;
  std::string manifest_bytes;
  std::vector<std::string> media;  // sorted allowlist of relative paths
};

// Loads every valid `<root>/<id>/manifest.json`. Invalid directories are
// skipped with a warning.
std::map<std::string, CatalogEntry> scan_root(const fs::path& root);

bool valid_video_id(std::string_view id);
std::string content_type_for(const fs::path& path);

class Server {
 public:
  explicit Server(ServeConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the configured port (0 picks a free one) and returns it.
  // Throws Error(kPrecondition) when the address is unavailable.
  int bind();
  // Blocks serving requests until stop().
  void run();
  void stop();
  void wait_until_ready() const;

  const std::map<std::string, CatalogEntry>& entries() const { return entries_; }

 private:
  void install_routes();

  ServeConfig config_;
  std::map<std::string, CatalogEntry> entries_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace lecsum::server
