// Copyright 2026 The avcd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avcd/wire.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "avcd/json_io.hpp"

namespace avcd {

using nlohmann::json;

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

ProcessTransport::ProcessTransport(std::vector<std::string> argv,
                                   std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  require(!argv.empty(), ErrorCode::kInvalidArgument, "process transport: empty command line");
  ignore_sigpipe_once();

  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) fail(ErrorCode::kTransport, "pipe: " + errno_text());
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail(ErrorCode::kTransport, "pipe: " + errno_text());
  }

  std::vector<char*> args;
  for (auto& a : argv) args.push_back(a.data());
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    fail(ErrorCode::kTransport, "fork: " + errno_text());
  }
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessTransport::~ProcessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    // Closing stdin asks the adapter to exit; give it a moment, then kill.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
}

void ProcessTransport::send(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::kTransport, "write to adapter failed: " + errno_text());
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string ProcessTransport::receive() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    require(left.count() > 0, ErrorCode::kTransport, "timed out waiting for adapter response");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    require(ready > 0, ErrorCode::kTransport, "timed out waiting for adapter response");
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    require(n > 0, ErrorCode::kTransport, "adapter closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string WireServer::handle(const std::string& line) {
  json id = nullptr;
  auto error = [&](const std::string& message) {
    return json{{"id", id}, {"type", "error"}, {"message", message}}.dump();
  };
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return error(std::string("malformed request: ") + e.what());
  }
  if (!request.is_object()) return error("malformed request: expected an object");
  if (request.contains("id")) id = request["id"];
  const std::string type = request.value("type", std::string());

  try {
    if (type == "hello") {
      const auto& d = provider_.descriptor();
      return json{{"id", id},
                  {"type", "descriptor"},
                  {"vocab_size", d.vocab_size},
                  {"layers", d.layer_count},
                  {"layout", json_io::layout_to_json(d.layout)},
                  {"name", d.name}}
          .dump();
    }
    if (type == "forward") {
      json_io::expect(request.contains("prefix"), "forward", "missing prefix");
      ForwardRequest fr;
      fr.prefix = json_io::prefix_from_json(request["prefix"], "forward.prefix");
      if (request.contains("mask") && !request["mask"].is_null()) {
        fr.mask = json_io::mask_from_json(request["mask"], "forward.mask");
      }
      const ForwardResponse r = provider_.forward(fr);
      return json{{"id", id},
                  {"type", "result"},
                  {"logits", json_io::logits_to_json(r.logits)},
                  {"attention", json_io::attention_to_json(r.attention)}}
          .dump();
    }
    return error("unknown request type '" + type + "'");
  } catch (const std::exception& e) {
    return error(e.what());
  }
}

void WireServer::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle(line) << '\n';
    out.flush();
  }
}

void LoopbackTransport::send(const std::string& line) { pending_.push_back(server_.handle(line)); }

std::string LoopbackTransport::receive() {
  require(!pending_.empty(), ErrorCode::kTransport, "loopback: no pending response");
  std::string line = std::move(pending_.front());
  pending_.pop_front();
  return line;
}

void RemoteProvider::die(ErrorCode code, const std::string& message) {
  alive_ = false;
  fail(code, message);
}

json RemoteProvider::round_trip(const json& request) {
  require(alive_, ErrorCode::kTransport, "remote provider: connection is dead");
  const std::uint64_t id = request["id"].get<std::uint64_t>();
  std::string line;
  try {
    transport_->send(request.dump());
    line = transport_->receive();
  } catch (const Error& e) {
    die(ErrorCode::kTransport, e.what());
  }
  json response;
  try {
    response = json::parse(line);
  } catch (const json::exception&) {
    die(ErrorCode::kProtocol, "protocol violation: malformed response line: " + line.substr(0, 200));
  }
  if (!response.is_object() || !response.contains("type") || !response["type"].is_string()) {
    die(ErrorCode::kProtocol, "protocol violation: response without a type");
  }
  if (!response.contains("id") || !response["id"].is_number_unsigned() ||
      response["id"].get<std::uint64_t>() != id) {
    die(ErrorCode::kIdMismatch, "response id mismatch: sent " + std::to_string(id) + ", got " +
                                    (response.contains("id") ? response["id"].dump() : "none"));
  }
  const std::string type = response["type"].get<std::string>();
  if (type == "error") {
    fail(ErrorCode::kProvider,
         "adapter error: " + response.value("message", std::string("(no message)")));
  }
  if (type != "descriptor" && type != "result") {
    die(ErrorCode::kProtocol, "protocol violation: unknown response type '" + type + "'");
  }
  return response;
}

RemoteProvider::RemoteProvider(std::unique_ptr<LineTransport> transport)
    : transport_(std::move(transport)) {
  require(transport_ != nullptr, ErrorCode::kInvalidArgument, "remote provider: null transport");
  const json r = round_trip(json{{"id", 0}, {"type", "hello"}});
  if (r["type"] != "descriptor") die(ErrorCode::kProtocol, "protocol violation: expected descriptor");
  try {
    descriptor_.vocab_size = r.at("vocab_size").get<std::size_t>();
    descriptor_.layer_count = r.at("layers").get<std::size_t>();
    descriptor_.layout = json_io::layout_from_json(r.at("layout"), "descriptor.layout");
    descriptor_.name = r.value("name", std::string("remote"));
  } catch (const std::exception& e) {
    die(ErrorCode::kProtocol, std::string("protocol violation: bad descriptor: ") + e.what());
  }
  if (descriptor_.vocab_size == 0 || descriptor_.layer_count == 0) {
    die(ErrorCode::kProtocol, "protocol violation: descriptor with zero vocab or layers");
  }
}

ForwardResponse RemoteProvider::do_forward(const Prefix& prefix, const MaskSpec* mask) {
  json request{{"id", next_id_++}, {"type", "forward"}, {"prefix", json_io::prefix_to_json(prefix)}};
  if (mask) request["mask"] = json_io::mask_to_json(*mask);
  const json r = round_trip(request);
  if (r["type"] != "result") die(ErrorCode::kProtocol, "protocol violation: expected result");
  ForwardResponse out;
  try {
    out.logits = json_io::logits_from_json(r.at("logits"), "result.logits");
    out.attention = json_io::attention_from_json(r.at("attention"), "result.attention");
  } catch (const std::exception& e) {
    die(ErrorCode::kProtocol, std::string("protocol violation: ") + e.what());
  }
  return out;
}

ForwardResponse remote_forward(RemoteProvider& connection, const ForwardRequest& request) {
  return connection.forward(request);
}

}  // namespace avcd
