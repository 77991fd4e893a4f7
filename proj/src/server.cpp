#include "lecsum/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "lecsum/error.hpp"

namespace lecsum::server {
namespace {

using json = nlohmann::json;

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kCorruptManifest, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool valid_video_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '_' || c == '-';
  });
}

std::string content_type_for(const fs::path& path) {
  static const std::map<std::string, std::string> types = {
      {".json", "application/json"}, {".png", "image/png"},
      {".jpg", "image/jpeg"},        {".jpeg", "image/jpeg"},
      {".ppm", "image/x-portable-pixmap"},
      {".mp4", "video/mp4"},         {".webm", "video/webm"},
      {".mkv", "video/x-matroska"},  {".wav", "audio/wav"},
      {".lsv", "application/json"},  {".lsc", "application/json"},
  };
  const auto it = types.find(path.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

std::map<std::string, CatalogEntry> scan_root(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kInvalidConfig, "serve root is not a directory: " + root.string());
  }
  std::map<std::string, CatalogEntry> entries;
  for (const auto& dirent : fs::directory_iterator(root, ec)) {
    if (!dirent.is_directory()) continue;
    const std::string id = dirent.path().filename().string();
    if (!valid_video_id(id) || !fs::exists(dirent.path() / catalog::kManifestFile)) continue;
    try {
      CatalogEntry entry;
      entry.video_id = id;
      entry.dir = dirent.path();
      entry.manifest_bytes = read_file(dirent.path() / catalog::kManifestFile);
      entry.manifest = catalog::manifest_from_json(json::parse(entry.manifest_bytes));
      entry.media = entry.manifest.media_paths();
      entries.emplace(id, std::move(entry));
    } catch (const std::exception& e) {
      spdlog::warn("skipping {}: {}", dirent.path().string(), e.what());
    }
  }
  if (entries.empty()) spdlog::warn("no valid manifests under {}", root.string());
  return entries;
}

Server::Server(ServeConfig config)
    : config_(std::move(config)),
      entries_(scan_root(config_.root)),
      http_(std::make_unique<httplib::Server>()) {
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port
  http_->set_socket_options([](int sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

Server::~Server() { stop(); }

void Server::install_routes() {
  auto& http = *http_;
  const auto allow = config_.cors_allowlist;
  http.set_post_routing_handler([allow](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    const bool any = std::find(allow.begin(), allow.end(), "*") != allow.end();
    if (any || std::find(allow.begin(), allow.end(), origin) != allow.end()) {
      res.set_header("Access-Control-Allow-Origin", any ? "*" : origin);
      res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Range");
      res.set_header("Access-Control-Expose-Headers", "Content-Range, Content-Length");
      if (!any) res.set_header("Vary", "Origin");
    }
  });
  http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  http.Get("/api/videos", [this](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& [id, e] : entries_) {
      list.push_back({{"video_id", id},
                      {"title", e.manifest.title},
                      {"duration", e.manifest.duration.seconds()},
                      {"segment_count", e.manifest.segments.size()}});
    }
    send_json(res, list);
  });

  http.Get(R"(/api/videos/([^/]+)/manifest)",
           [this](const httplib::Request& req, httplib::Response& res) {
             const auto it = entries_.find(req.matches[1]);
             if (it == entries_.end()) return send_error(res, 404, "unknown video");
             res.set_content(it->second.manifest_bytes, "application/json; charset=utf-8");
           });

  http.Get(R"(/api/videos/([^/]+)/search)",
           [this](const httplib::Request& req, httplib::Response& res) {
             const auto it = entries_.find(req.matches[1]);
             if (it == entries_.end()) return send_error(res, 404, "unknown video");
             try {
               json hits = json::array();
               for (const auto& h : catalog::search(it->second.manifest, req.get_param_value("q"))) {
                 hits.push_back(catalog::to_json(h));
               }
               send_json(res, hits);
             } catch (const Error& e) {
               send_error(res, 400, e.what());
             }
           });

  http.Get(R"(/media/([^/]+)/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto it = entries_.find(req.matches[1]);
    if (it == entries_.end()) return send_error(res, 404, "unknown video");
    const std::string rel = req.matches[2];
    const auto& media = it->second.media;
    if (!std::binary_search(media.begin(), media.end(), rel)) {
      return send_error(res, 404, "not found");
    }
    const fs::path path = it->second.dir / rel;
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) return send_error(res, 404, "not found");
    res.set_header("Accept-Ranges", "bytes");
    // httplib answers 416 when a range runs past EOF; clamp instead so an
    // overlong last-byte-pos or suffix length gets the available bytes.
    // The request object itself is mutable inside httplib.
    const auto len = static_cast<ssize_t>(size);
    for (auto& r : const_cast<httplib::Request&>(req).ranges) {
      if (r.first == -1 && r.second > len) r.second = len;
      if (r.first != -1 && r.first < len && r.second >= len) r.second = len - 1;
    }
    if (size == 0) return res.set_content("", content_type_for(path));
    auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
    res.set_content_provider(
        static_cast<std::size_t>(size), content_type_for(path),
        [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
          std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
          file->clear();
          file->seekg(static_cast<std::streamoff>(offset));
          file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
          const auto got = file->gcount();
          if (got <= 0) return false;
          return sink.write(buf.data(), static_cast<std::size_t>(got));
        });
  });

  if (!config_.ui_dir.empty() && !http.set_mount_point("/", config_.ui_dir.string())) {
    throw Error(ErrorCode::kInvalidConfig, "ui directory missing: " + config_.ui_dir.string());
  }
}

int Server::bind() {
  int port = config_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(config_.bind);
  } else if (!http_->bind_to_port(config_.bind, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::kPrecondition,
                "cannot bind " + config_.bind + ":" + std::to_string(config_.port));
  }
  return port;
}

void Server::run() { http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

void Server::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace lecsum::server
