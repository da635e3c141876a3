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

// Newline-delimited JSON provider protocol.
//
//   -> {"id":0,"type":"hello"}
//   <- {"id":0,"type":"descriptor","vocab_size":V,"layers":J,
//       "layout":[["video",s,e],["audio",s,e],["language",s,e]]}
//   -> {"id":n,"type":"forward","prefix":[...],
//       "mask":{"key_indices":[...],"layer_policy":"all_but_last"}}
//   <- {"id":n,"type":"result","logits":[...],"attention":[[...]...]}
//   <- {"id":n,"type":"error","message":"..."}
//
// "mask" is omitted for an unmasked pass. Any other response "type" is a
// protocol violation.

#pragma once

#include <chrono>
#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "avcd/provider.hpp"

namespace avcd {

/// A bidirectional stream of text lines (newline excluded).
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void send(const std::string& line) = 0;
  /// Throws Error(kTransport) when the peer has gone away.
  virtual std::string receive() = 0;
};

/// Runs `argv` as a child process and talks to its stdin/stdout. SIGPIPE is
/// set to ignored the first time one is created so a dead child surfaces as a
/// transport error instead of terminating the caller.
class ProcessTransport final : public LineTransport {
 public:
  explicit ProcessTransport(std::vector<std::string> argv,
                            std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ProcessTransport() override;

  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  void send(const std::string& line) override;
  std::string receive() override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::chrono::milliseconds timeout_;
};

/// Answers protocol lines from an in-process provider.
class WireServer {
 public:
  explicit WireServer(Provider& provider) : provider_(provider) {}

  /// One request line in, one response line out. Never throws for bad input;
  /// malformed requests get an "error" response.
  std::string handle(const std::string& line);

  /// Serves until EOF on `in`.
  void serve(std::istream& in, std::ostream& out);

 private:
  Provider& provider_;
};

/// Transport that hands every line straight to a WireServer.
class LoopbackTransport final : public LineTransport {
 public:
  explicit LoopbackTransport(Provider& provider) : server_(provider) {}

  void send(const std::string& line) override;
  std::string receive() override;

 private:
  WireServer server_;
  std::deque<std::string> pending_;
};

/// Provider backed by a remote adapter. The constructor performs the
/// handshake. Requests are serialized; after a protocol violation, id
/// mismatch or transport failure the connection is dead and every later
/// request fails.
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(std::unique_ptr<LineTransport> transport);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  bool alive() const noexcept { return alive_; }

 protected:
  ForwardResponse do_forward(const Prefix& prefix, const MaskSpec* mask) override;

 private:
  /// Sends `request` and returns the parsed response carrying the same id.
  nlohmann::json round_trip(const nlohmann::json& request);
  [[noreturn]] void die(ErrorCode code, const std::string& message);

  std::unique_ptr<LineTransport> transport_;
  ProviderDescriptor descriptor_;
  std::uint64_t next_id_ = 1;
  bool alive_ = true;
};

/// Sends one forward request over an established connection.
ForwardResponse remote_forward(RemoteProvider& connection, const ForwardRequest& request);

}  // namespace avcd
