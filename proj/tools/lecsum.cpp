#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <csignal>
#include <iostream>
#include <thread>

#include "lecsum/config.hpp"
#include "lecsum/error.hpp"
#include "lecsum/pipeline.hpp"
#include "lecsum/server.hpp"

namespace {

namespace fs = std::filesystem;

int run_process(const fs::path& video, const fs::path& config_path, const fs::path& out,
                const std::string& video_id, const std::string& title, bool json_report) {
  const auto config = lecsum::load_config(config_path);
  lecsum::pipeline::ProcessOptions options;
  options.video = video;
  options.out_root = out.empty() ? config.output_dir : out;
  options.video_id = video_id;
  options.title = title;
  const auto report = lecsum::pipeline::process(options, config);
  if (json_report) {
    std::cout << lecsum::pipeline::to_json(report).dump(2) << "\n";
  } else {
    std::cout << report.manifest_dir.string() << "\n"
              << lecsum::pipeline::render_table(lecsum::pipeline::inspect(report.manifest_dir));
    for (const auto& f : report.failures) {
      std::cout << "segment " << f.segment_index << " degraded (" << f.stage
                << "): " << f.message << "\n";
    }
  }
  return report.exit_code();
}

int run_inspect(const fs::path& dir, bool json) {
  const auto report = lecsum::pipeline::inspect(dir);
  if (json) {
    std::cout << lecsum::pipeline::to_json(report).dump(2) << "\n";
  } else {
    std::cout << lecsum::pipeline::render_table(report);
  }
  return 0;
}

int run_serve(lecsum::server::ServeConfig config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  lecsum::server::Server server(std::move(config));
  const int port = server.bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, stopping", sig);
    server.stop();
  });
  spdlog::info("serving {} videos on port {}", server.entries().size(), port);
  std::cout << "listening on port " << port << std::endl;
  server.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lecture video summarizer"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  auto* process = app.add_subcommand("process", "summarize a lecture video");
  fs::path video, config_path, out;
  std::string video_id, title;
  bool json_report = false;
  process->add_option("video", video, "input video")->required();
  process->add_option("--config", config_path, "TOML configuration")->required();
  process->add_option("--out", out, "output root (default: output.dir from the config)");
  process->add_option("--video-id", video_id, "output directory name");
  process->add_option("--title", title, "video title");
  process->add_flag("--json", json_report, "print the pipeline report as JSON");

  auto* inspect = app.add_subcommand("inspect", "print the report of a processed video");
  fs::path manifest_dir;
  bool inspect_json = false;
  inspect->add_option("dir", manifest_dir, "manifest directory")->required();
  inspect->add_flag("--json", inspect_json, "machine-readable output");

  auto* serve = app.add_subcommand("serve", "serve processed videos over HTTP");
  lecsum::server::ServeConfig serve_config;
  serve->add_option("--root", serve_config.root, "directory of processed videos")->required();
  serve->add_option("--port", serve_config.port, "TCP port (0 picks one)");
  serve->add_option("--bind", serve_config.bind, "bind address");
  serve->add_option("--cors", serve_config.cors_allowlist, "allowed CORS origin (repeatable)");
  serve->add_option("--ui", serve_config.ui_dir, "static web UI directory");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("lecsum"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  try {
    if (*process) return run_process(video, config_path, out, video_id, title, json_report);
    if (*inspect) return run_inspect(manifest_dir, inspect_json);
    if (*serve) return run_serve(std::move(serve_config));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
