/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Line-delimited JSON backend protocol.
//
// Request:  {"id": string, "method": string, "params": object}
// Response: {"id": string, "ok": true,  "result": object}
//           {"id": string, "ok": false, "error": {"code": string, "message": string}}
//
// Methods and their params / results:
//   meta                                      -> {n_layers, d_ff, default_temperature}
//   generate   {prompt, temperature?, max_new_tokens?, seed?}        -> {text}
//   answer_logprob      {prompt, answer}      -> {logprob}
//   activations         {prompt, answer}      -> {n_layers, d_ff, values}
//   activation_gradient {prompt, answer, layer, neuron, alpha}       -> {gradient}
//
// "values" is the flat layer-major activation vector. Requests that cannot
// be parsed are answered with id null.

#ifndef CROSSRISK_PROTOCOL_HPP_
#define CROSSRISK_PROTOCOL_HPP_

#include <atomic>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "crossrisk/model.hpp"

namespace crossrisk::protocol {

// Answers one request line; never throws. The result has no trailing newline.
std::string HandleLine(const model::Backend& backend, std::string_view line);

// Serves requests from `in` until end of stream, one response line each.
void ServeStream(const model::Backend& backend, std::istream& in,
                 std::ostream& out);

// Accepts TCP connections and serves each on its own thread.
class TcpServer {
 public:
  // Binds immediately; port 0 picks a free port.
  TcpServer(const model::Backend& backend, const std::string& host, int port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  // Blocks until Stop() is called.
  void Run();
  void Stop();

 private:
  const model::Backend& backend_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
};

// Sends one request line and returns one response line.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string RoundTrip(const std::string& line) = 0;
};

// "host:port".
std::unique_ptr<Transport> ConnectTcp(const std::string& host, int port);
// Runs `command` under /bin/sh and talks to its stdin/stdout.
std::unique_ptr<Transport> SpawnStdio(const std::string& command);

// A Backend that forwards every call over a transport. Calls are serialized.
class RemoteBackend : public model::Backend {
 public:
  explicit RemoteBackend(std::unique_ptr<Transport> transport);

  model::BackendMeta Meta() const override;
  std::string Generate(std::string_view prompt,
                       const model::GenerationConfig& config) const override;
  double AnswerLogProb(const model::PromptAnswerPair& pair) const override;
  model::ActivationSnapshot CaptureActivations(
      const model::PromptAnswerPair& pair) const override;
  double ActivationGradient(const model::PromptAnswerPair& pair,
                            const NeuronRef& neuron,
                            double alpha) const override;

 private:
  std::string Request(std::string_view method, const std::string& params) const;

  mutable std::mutex mu_;
  mutable std::unique_ptr<Transport> transport_;
  mutable std::uint64_t next_id_ = 1;
};

// "tcp://host:port" or "stdio:<command>".
std::unique_ptr<RemoteBackend> ConnectBackend(const std::string& address);

}  // namespace crossrisk::protocol

#endif  // CROSSRISK_PROTOCOL_HPP_
