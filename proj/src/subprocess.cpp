#include "lecsum/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <system_error>
#include <utility>

#include "lecsum/error.hpp"

extern char** environ;

namespace lecsum {
namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

int poll_timeout_ms(std::optional<Process::Clock::time_point> deadline) {
  if (!deadline) return -1;
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      *deadline - Process::Clock::now());
  return static_cast<int>(std::max<long long>(0, left.count()));
}

bool is_executable_file(const std::string& path) {
  struct stat st {};
  return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) &&
         ::access(path.c_str(), X_OK) == 0;
}

}  // namespace

Argv split_command_line(std::string_view line) {
  Argv args;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote == '\'') {
      if (c == '\'') {
        quote = 0;
      } else {
        current.push_back(c);
      }
      continue;
    }
    if (quote == '"') {
      if (c == '"') {
        quote = 0;
      } else if (c == '\\' && i + 1 < line.size() &&
                 (line[i + 1] == '"' || line[i + 1] == '\\')) {
        current.push_back(line[++i]);
      } else {
        current.push_back(c);
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == '\\' && i + 1 < line.size()) {
      current.push_back(line[++i]);
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (in_token) {
        args.push_back(std::move(current));
        current.clear();
        in_token = false;
      }
    } else {
      current.push_back(c);
      in_token = true;
    }
  }
  if (quote != 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "unterminated quote in command: " + std::string(line));
  }
  if (in_token) args.push_back(std::move(current));
  return args;
}

std::string join_command_line(const Argv& argv) {
  std::string line;
  for (const auto& arg : argv) {
    if (!line.empty()) line += ' ';
    const bool plain = !arg.empty() && arg.find_first_not_of(
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-./=:,+@%") ==
        std::string::npos;
    if (plain) {
      line += arg;
      continue;
    }
    line += '\'';
    for (char c : arg) {
      if (c == '\'') {
        line += "'\\''";
      } else {
        line += c;
      }
    }
    line += '\'';
  }
  return line;
}

Argv expand_command(std::string_view command_template,
                    const std::map<std::string, std::string>& vars) {
  Argv args = split_command_line(command_template);
  for (auto& arg : args) {
    std::string out;
    std::size_t pos = 0;
    while (pos < arg.size()) {
      const auto open = arg.find('{', pos);
      if (open == std::string::npos) {
        out.append(arg, pos);
        break;
      }
      const auto close = arg.find('}', open);
      if (close == std::string::npos) {
        out.append(arg, pos);
        break;
      }
      out.append(arg, pos, open - pos);
      const std::string name = arg.substr(open + 1, close - open - 1);
      const auto it = vars.find(name);
      if (it == vars.end()) {
        throw Error(ErrorCode::kInvalidConfig,
                    "unknown placeholder {" + name + "} in command: " +
                        std::string(command_template));
      }
      out += it->second;
      pos = close + 1;
    }
    arg = std::move(out);
  }
  if (args.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "empty command template");
  }
  return args;
}

bool executable_available(std::string_view argv0) {
  if (argv0.empty()) return false;
  const std::string name(argv0);
  if (name.find('/') != std::string::npos) return is_executable_file(name);
  const char* path_env = std::getenv("PATH");
  std::string_view path = path_env ? path_env : "/usr/bin:/bin";
  while (!path.empty()) {
    const auto colon = path.find(':');
    std::string dir(path.substr(0, colon));
    if (dir.empty()) dir = ".";
    if (is_executable_file(dir + "/" + name)) return true;
    if (colon == std::string_view::npos) break;
    path.remove_prefix(colon + 1);
  }
  return false;
}

Process Process::spawn(const Argv& argv, bool pipe_stdin) {
  if (argv.empty()) throw SpawnFailure(EINVAL, "empty argv");
  ignore_sigpipe_once();

  int in_pipe[2] = {-1, -1};
  int out_pipe[2] = {-1, -1};
  int err_pipe[2] = {-1, -1};
  auto close_all = [&] {
    for (int* p : {in_pipe, out_pipe, err_pipe}) {
      close_fd(p[0]);
      close_fd(p[1]);
    }
  };
  if ((pipe_stdin && ::pipe2(in_pipe, O_CLOEXEC) != 0) ||
      ::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    const int err = errno;
    close_all();
    throw SpawnFailure(err, std::string("pipe: ") + std::strerror(err));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (pipe_stdin) {
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  } else {
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null",
                                     O_RDONLY, 0);
  }
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGDEF);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  pid_t pid = -1;
  const int rc =
      ::posix_spawnp(&pid, cargv[0], &actions, &attr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    close_all();
    throw SpawnFailure(rc, "cannot start '" + argv[0] + "': " + std::strerror(rc));
  }

  Process p;
  p.pid_ = pid;
  if (pipe_stdin) {
    close_fd(in_pipe[0]);
    p.stdin_fd_ = in_pipe[1];
  }
  close_fd(out_pipe[1]);
  close_fd(err_pipe[1]);
  p.stdout_fd_ = out_pipe[0];
  p.stderr_fd_ = err_pipe[0];
  ::fcntl(p.stderr_fd_, F_SETFL, O_NONBLOCK);
  return p;
}

Process::Process(Process&& other) noexcept { *this = std::move(other); }

Process& Process::operator=(Process&& other) noexcept {
  if (this != &other) {
    release();
    pid_ = std::exchange(other.pid_, -1);
    stdin_fd_ = std::exchange(other.stdin_fd_, -1);
    stdout_fd_ = std::exchange(other.stdout_fd_, -1);
    stderr_fd_ = std::exchange(other.stderr_fd_, -1);
    stderr_ = std::move(other.stderr_);
  }
  return *this;
}

Process::~Process() { release(); }

void Process::release() {
  close_pipes();
  if (pid_ > 0) {
    kill();
    wait();
  }
}

void Process::drain_stderr_nonblocking() {
  if (stderr_fd_ < 0) return;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::read(stderr_fd_, buf, sizeof(buf));
    if (n > 0) {
      // Keep the head of the diagnostics; enough to report a failure.
      if (stderr_.size() < 64 * 1024) stderr_.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) close_fd(stderr_fd_);
    return;
  }
}

std::size_t Process::read_stdout(std::span<std::byte> buffer,
                                 std::optional<Clock::time_point> deadline) {
  std::size_t filled = 0;
  while (filled < buffer.size() && stdout_fd_ >= 0) {
    pollfd fds[2] = {{stdout_fd_, POLLIN, 0}, {stderr_fd_, POLLIN, 0}};
    const nfds_t count = stderr_fd_ >= 0 ? 2 : 1;
    const int ready = ::poll(fds, count, poll_timeout_ms(deadline));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "poll");
    }
    if (ready == 0) {
      kill();
      throw ProcessTimeout("process timed out");
    }
    if (count == 2 && fds[1].revents != 0) drain_stderr_nonblocking();
    if (fds[0].revents != 0) {
      const ssize_t n =
          ::read(stdout_fd_, buffer.data() + filled, buffer.size() - filled);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw std::system_error(errno, std::generic_category(), "read");
      }
      if (n == 0) {
        close_fd(stdout_fd_);
        break;
      }
      filled += static_cast<std::size_t>(n);
    }
  }
  return filled;
}

std::string Process::communicate(std::string_view input,
                                 std::optional<Clock::time_point> deadline) {
  std::string out;
  std::size_t written = 0;
  if (stdin_fd_ >= 0) {
    ::fcntl(stdin_fd_, F_SETFL, O_NONBLOCK);
    if (input.empty()) close_fd(stdin_fd_);
  }
  char buf[8192];
  while (stdout_fd_ >= 0 || stderr_fd_ >= 0 || stdin_fd_ >= 0) {
    pollfd fds[3];
    nfds_t count = 0;
    int in_slot = -1, out_slot = -1, err_slot = -1;
    if (stdin_fd_ >= 0) {
      in_slot = static_cast<int>(count);
      fds[count++] = {stdin_fd_, POLLOUT, 0};
    }
    if (stdout_fd_ >= 0) {
      out_slot = static_cast<int>(count);
      fds[count++] = {stdout_fd_, POLLIN, 0};
    }
    if (stderr_fd_ >= 0) {
      err_slot = static_cast<int>(count);
      fds[count++] = {stderr_fd_, POLLIN, 0};
    }
    const int ready = ::poll(fds, count, poll_timeout_ms(deadline));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "poll");
    }
    if (ready == 0) {
      kill();
      throw ProcessTimeout("process timed out");
    }
    if (in_slot >= 0 && fds[in_slot].revents != 0) {
      if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
        close_fd(stdin_fd_);  // child stopped reading
      } else {
        const ssize_t n =
            ::write(stdin_fd_, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if ((n < 0 && errno == EPIPE) || written == input.size()) {
          close_fd(stdin_fd_);
        }
      }
    }
    if (out_slot >= 0 && fds[out_slot].revents != 0) {
      const ssize_t n = ::read(stdout_fd_, buf, sizeof(buf));
      if (n > 0) {
        out.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        close_fd(stdout_fd_);
      }
    }
    if (err_slot >= 0 && fds[err_slot].revents != 0) drain_stderr_nonblocking();
  }
  return out;
}

void Process::close_pipes() {
  close_fd(stdin_fd_);
  close_fd(stdout_fd_);
  close_fd(stderr_fd_);
}

void Process::kill() {
  if (pid_ > 0) ::kill(pid_, SIGKILL);
}

ExitStatus Process::wait() {
  ExitStatus status;
  if (pid_ <= 0) return status;
  int raw = 0;
  while (::waitpid(pid_, &raw, 0) < 0) {
    if (errno != EINTR) break;
  }
  pid_ = -1;
  if (WIFEXITED(raw)) {
    status.code = WEXITSTATUS(raw);
  } else if (WIFSIGNALED(raw)) {
    status.signaled = true;
    status.code = 128 + WTERMSIG(raw);
  }
  return status;
}

CommandResult run_command(const Argv& argv, std::string_view input,
                          std::chrono::milliseconds timeout) {
  Process proc = Process::spawn(argv, true);
  const auto deadline = Process::Clock::now() + timeout;
  CommandResult result;
  try {
    result.out = proc.communicate(input, deadline);
  } catch (const ProcessTimeout&) {
    proc.close_pipes();
    proc.wait();
    throw;
  }
  proc.close_pipes();
  result.status = proc.wait();
  result.err = proc.stderr_text();
  return result;
}

}  // namespace lecsum
