#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "coprotector/audit.h"
#include "coprotector/error.h"
#include "httplib.h"
#include "json.hpp"

namespace coprotector {
namespace {

[[noreturn]] void AdapterFailure(const std::string& what) {
  throw Error(ErrorCode::kAdapterError, what);
}

void WriteAll(int fd, std::string_view data, const std::string& who) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      AdapterFailure(who + ": write failed: " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
}

}  // namespace

std::string EscapeLine(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out += c;
    }
  }
  return out;
}

std::string UnescapeLine(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && i + 1 < line.size()) {
      const char next = line[i + 1];
      if (next == 'n' || next == 'r' || next == '\\') {
        out += next == 'n' ? '\n' : next == 'r' ? '\r' : '\\';
        ++i;
        continue;
      }
    }
    out += line[i];
  }
  return out;
}

SubprocessModel::SubprocessModel(std::string command) : command_(std::move(command)) {
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) AdapterFailure("pipe failed: " + std::string(std::strerror(errno)));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    AdapterFailure("pipe failed: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) AdapterFailure("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessModel::~SubprocessModel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

std::string SubprocessModel::Query(const std::string& input) {
  const std::string who = "subprocess '" + command_ + "'";
  WriteAll(to_child_, EscapeLine(input) + "\n", who);
  for (;;) {
    const size_t newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return UnescapeLine(line);
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      AdapterFailure(who + ": read failed: " + std::strerror(errno));
    }
    if (n == 0) AdapterFailure(who + " closed its output before answering");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

std::string SubprocessModel::Describe() const { return "subprocess:" + command_; }

HttpModel::HttpModel(std::string url) : url_(std::move(url)) {
  constexpr std::string_view kScheme = "http://";
  if (url_.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "only http:// endpoints are supported: " + url_);
  }
  std::string rest = url_.substr(kScheme.size());
  const size_t slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  const size_t colon = authority.rfind(':');
  if (colon != std::string::npos) {
    try {
      port_ = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad port in " + url_);
    }
    authority.resize(colon);
  }
  if (authority.empty()) throw Error(ErrorCode::kInvalidArgument, "missing host in " + url_);
  host_ = authority;
}

std::string HttpModel::Query(const std::string& input) {
  httplib::Client client(host_, port_);
  nlohmann::json body;
  body["input"] = input;
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) AdapterFailure(url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) AdapterFailure(url_ + ": HTTP status " + std::to_string(res->status));
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("output").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    AdapterFailure(url_ + ": bad response: " + e.what());
  }
}

std::string HttpModel::Describe() const { return url_; }

ReplayModel::ReplayModel(std::map<std::string, std::string> answers)
    : answers_(std::move(answers)) {}

ReplayModel ReplayModel::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::map<std::string, std::string> answers;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      answers[j.at("input").get<std::string>()] = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ReplayModel(std::move(answers));
}

std::string ReplayModel::Query(const std::string& input) {
  auto it = answers_.find(input);
  if (it == answers_.end()) AdapterFailure("replay has no recorded answer for an input");
  return it->second;
}

std::string ReplayModel::Describe() const {
  return "replay(" + std::to_string(answers_.size()) + " records)";
}

std::unique_ptr<ModelAdapter> MakeAdapter(std::string_view spec, const Backdoor& backdoor,
                                          TaskMode mode, uint64_t seed,
                                          std::string_view language) {
  auto after = [&](std::string_view prefix) { return std::string(spec.substr(prefix.size())); };
  if (spec.rfind("subprocess:", 0) == 0) {
    return std::make_unique<SubprocessModel>(after("subprocess:"));
  }
  if (spec.rfind("http://", 0) == 0) return std::make_unique<HttpModel>(std::string(spec));
  if (spec.rfind("replay:", 0) == 0) {
    return std::make_unique<ReplayModel>(ReplayModel::LoadFile(after("replay:")));
  }
  if (spec.rfind("mock:", 0) == 0) {
    const std::string args = after("mock:");
    const size_t comma = args.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      const double p_trigger = std::stod(args.substr(0, comma));
      const double p_base = std::stod(args.substr(comma + 1));
      return std::make_unique<MockModel>(backdoor, mode, p_trigger, p_base, seed,
                                         std::string(language));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mock adapter expects mock:<p_trigger>,<p_base>, got '" + std::string(spec) + "'");
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown adapter '" + std::string(spec) +
                  "' (expected subprocess:<cmd>, http://..., replay:<file> or mock:<pt>,<pb>)");
}

}  // namespace coprotector
