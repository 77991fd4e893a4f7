#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lecsum {

using Argv = std::vector<std::string>;

// Splits a command line into arguments with POSIX-shell-like quoting
// ('single', "double", backslash escapes). No expansion of any kind.
Argv split_command_line(std::string_view line);

// Splits `command_template` and replaces every `{name}` in each argument with
// vars.at(name). Substituted values never split into further arguments.
// Throws Error(kInvalidConfig) on an unknown placeholder.
Argv expand_command(std::string_view command_template,
                    const std::map<std::string, std::string>& vars);

// Inverse of split_command_line: single-quotes arguments that need it.
std::string join_command_line(const Argv& argv);

// True when argv0 names an executable file, directly or through PATH.
bool executable_available(std::string_view argv0);

class ProcessTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the executable cannot be started; err holds the errno.
class SpawnFailure : public std::runtime_error {
 public:
  SpawnFailure(int err, const std::string& what)
      : std::runtime_error(what), err_(err) {}
  int error_number() const noexcept { return err_; }

 private:
  int err_;
};

struct ExitStatus {
  int code = 0;         // exit code, or 128 + signal number
  bool signaled = false;
  bool ok() const noexcept { return !signaled && code == 0; }
};

// A child process with piped stdout/stderr and optionally piped stdin.
// Stderr is drained while stdout is read so the child never blocks on it.
class Process {
 public:
  using Clock = std::chrono::steady_clock;

  static Process spawn(const Argv& argv, bool pipe_stdin);

  Process(Process&& other) noexcept;
  Process& operator=(Process&& other) noexcept;
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;
  ~Process();

  // Reads into `buffer` until it is full or stdout reaches EOF. Returns the
  // byte count read. Throws ProcessTimeout past `deadline`.
  std::size_t read_stdout(std::span<std::byte> buffer,
                          std::optional<Clock::time_point> deadline = {});

  // Writes `input` to stdin (if piped) while draining stdout and stderr, then
  // closes stdin and reads until EOF. Returns the full stdout.
  std::string communicate(std::string_view input,
                          std::optional<Clock::time_point> deadline = {});

  // Closes our ends of the pipes; a still-writing child sees SIGPIPE.
  void close_pipes();
  ExitStatus wait();
  void kill();

  const std::string& stderr_text() const noexcept { return stderr_; }
  pid_t pid() const noexcept { return pid_; }

 private:
  Process() = default;
  void drain_stderr_nonblocking();
  void release();

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::string stderr_;
};

struct CommandResult {
  ExitStatus status;
  std::string out;
  std::string err;
};

// Runs argv to completion with `input` on stdin. Throws SpawnFailure when the
// program cannot be started and ProcessTimeout (after killing it) on timeout.
CommandResult run_command(const Argv& argv, std::string_view input,
                          std::chrono::milliseconds timeout);

}  // namespace lecsum
