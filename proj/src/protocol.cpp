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

#include "crossrisk/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include "json.hpp"

namespace crossrisk::protocol {
namespace {

using nlohmann::json;

ErrorCode ParseErrorCode(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kNoConflictNeurons); ++i) {
    if (ErrorCodeName(static_cast<ErrorCode>(i)) == name) return static_cast<ErrorCode>(i);
  }
  return ErrorCode::kBackend;
}

json ErrorBody(ErrorCode code, const std::string& message) {
  return {{"code", ErrorCodeName(code)}, {"message", message}};
}

template <typename T>
T Param(const json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing param '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad param '") + key + "'");
  }
}

template <typename T>
T ParamOr(const json& params, const char* key, T fallback) {
  return params.contains(key) ? Param<T>(params, key) : fallback;
}

model::PromptAnswerPair PairParams(const json& params) {
  model::PromptAnswerPair pair;
  pair.prompt = Param<std::string>(params, "prompt");
  pair.answer = Param<std::string>(params, "answer");
  return pair;
}

json Dispatch(const model::Backend& backend, const std::string& method,
              const json& params) {
  if (method == "meta") {
    const model::BackendMeta m = backend.Meta();
    return {{"n_layers", m.n_layers}, {"d_ff", m.d_ff},
            {"default_temperature", m.default_temperature}};
  }
  if (method == "generate") {
    model::GenerationConfig cfg;
    cfg.temperature = ParamOr<double>(params, "temperature", 0.0);
    cfg.max_new_tokens = ParamOr<int>(params, "max_new_tokens", model::kDefaultMaxNewTokens);
    cfg.trial_seed = ParamOr<std::uint64_t>(params, "seed", 0);
    return {{"text", backend.Generate(Param<std::string>(params, "prompt"), cfg)}};
  }
  if (method == "answer_logprob") {
    return {{"logprob", backend.AnswerLogProb(PairParams(params))}};
  }
  if (method == "activations") {
    const model::ActivationSnapshot s = backend.CaptureActivations(PairParams(params));
    return {{"n_layers", s.space.n_layers}, {"d_ff", s.space.d_ff}, {"values", s.values}};
  }
  if (method == "activation_gradient") {
    const NeuronRef n{Param<int>(params, "layer"), Param<int>(params, "neuron")};
    return {{"gradient", backend.ActivationGradient(PairParams(params), n,
                                                    Param<double>(params, "alpha"))}};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + method + "'");
}

// Buffered line reader over a file descriptor.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  bool ReadLine(std::string& line) {
    for (;;) {
      const std::size_t nl = buf_.find('\n');
      if (nl != std::string::npos) {
        line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return true;
      }
      char chunk[4096];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
};

bool WriteAll(int fd, std::string_view data, bool socket) {
  while (!data.empty()) {
    const ssize_t n = socket ? ::send(fd, data.data(), data.size(), MSG_NOSIGNAL)
                             : ::write(fd, data.data(), data.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd), reader_(fd) {}
  ~TcpTransport() override { ::close(fd_); }

  std::string RoundTrip(const std::string& line) override {
    if (!WriteAll(fd_, line + "\n", true)) {
      throw Error(ErrorCode::kBackendUnreachable, "connection lost while sending");
    }
    std::string reply;
    if (!reader_.ReadLine(reply)) {
      throw Error(ErrorCode::kBackendUnreachable, "connection closed by backend");
    }
    return reply;
  }

 private:
  int fd_;
  LineReader reader_;
};

class StdioTransport : public Transport {
 public:
  StdioTransport(pid_t pid, int to_child, int from_child)
      : pid_(pid), to_child_(to_child), from_child_(from_child), reader_(from_child) {}
  ~StdioTransport() override {
    ::close(to_child_);
    ::close(from_child_);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

  std::string RoundTrip(const std::string& line) override {
    if (!WriteAll(to_child_, line + "\n", false)) {
      throw Error(ErrorCode::kBackendUnreachable, "backend process stopped reading");
    }
    std::string reply;
    if (!reader_.ReadLine(reply)) {
      throw Error(ErrorCode::kBackendUnreachable, "backend process exited");
    }
    return reply;
  }

 private:
  pid_t pid_;
  int to_child_;
  int from_child_;
  LineReader reader_;
};

void ServeFd(const model::Backend& backend, int fd) {
  LineReader reader(fd);
  std::string line;
  while (reader.ReadLine(line)) {
    if (!WriteAll(fd, HandleLine(backend, line) + "\n", true)) break;
  }
  ::close(fd);
}

}  // namespace

std::string HandleLine(const model::Backend& backend, std::string_view line) {
  json id = nullptr;
  json response;
  try {
    const json request = json::parse(line, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
      throw Error(ErrorCode::kFormat, "request is not a JSON object");
    }
    if (auto it = request.find("id"); it != request.end() && it->is_string()) id = *it;
    if (id.is_null()) throw Error(ErrorCode::kFormat, "request without a string id");
    auto method = request.find("method");
    if (method == request.end() || !method->is_string()) {
      throw Error(ErrorCode::kFormat, "request without a string method");
    }
    json params = json::object();
    if (auto it = request.find("params"); it != request.end()) {
      if (!it->is_object()) throw Error(ErrorCode::kFormat, "params must be an object");
      params = *it;
    }
    response = {{"id", id}, {"ok", true},
                {"result", Dispatch(backend, method->get<std::string>(), params)}};
  } catch (const Error& e) {
    response = {{"id", id}, {"ok", false}, {"error", ErrorBody(e.code(), e.what())}};
  } catch (const std::exception& e) {
    response = {{"id", id}, {"ok", false},
                {"error", ErrorBody(ErrorCode::kBackend, e.what())}};
  }
  return response.dump(-1, ' ', false, json::error_handler_t::replace);
}

void ServeStream(const model::Backend& backend, std::istream& in,
                 std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << HandleLine(backend, line) << '\n';
    out.flush();
  }
}

TcpServer::TcpServer(const model::Backend& backend, const std::string& host,
                     int port)
    : backend_(backend) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::kIo, "socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(ErrorCode::kInvalidArgument, "listen address must be IPv4: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  Stop();
  ::close(listen_fd_);
}

void TcpServer::Run() {
  std::vector<std::jthread> sessions;
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (stopping_) {
      ::close(fd);
      break;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    sessions.emplace_back([this, fd] { ServeFd(backend_, fd); });
  }
}

void TcpServer::Stop() {
  if (!stopping_.exchange(true)) ::shutdown(listen_fd_, SHUT_RDWR);
}

std::unique_ptr<Transport> ConnectTcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string where = host + ":" + std::to_string(port);
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
    throw Error(ErrorCode::kBackendUnreachable, "cannot resolve " + where);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::kBackendUnreachable, "cannot connect to " + where);
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<TcpTransport>(fd);
}

std::unique_ptr<Transport> SpawnStdio(const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw Error(ErrorCode::kBackendUnreachable, "pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::kBackendUnreachable, "pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kBackendUnreachable, "fork() failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  // A backend that dies mid-request must surface as an error, not a signal.
  std::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<StdioTransport>(pid, in_pipe[1], out_pipe[0]);
}

RemoteBackend::RemoteBackend(std::unique_ptr<Transport> transport)
    : transport_(std::move(transport)) {}

std::string RemoteBackend::Request(std::string_view method,
                                   const std::string& params) const {
  std::lock_guard lock(mu_);
  const std::string id = std::to_string(next_id_++);
  json request = {{"id", id}, {"method", method}, {"params", json::parse(params)}};
  const json reply = json::parse(transport_->RoundTrip(request.dump()), nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("ok") ||
      !reply["ok"].is_boolean()) {
    throw Error(ErrorCode::kBackend, "malformed response to " + std::string(method));
  }
  if (!reply.contains("id") || reply["id"] != id) {
    throw Error(ErrorCode::kBackend, "response id does not match request " + id);
  }
  if (!reply["ok"].get<bool>()) {
    const json err = reply.value("error", json::object());
    const std::string message = err.is_object() ? err.value("message", "backend error")
                                                : err.dump();
    const ErrorCode code = err.is_object() ? ParseErrorCode(err.value("code", "backend"))
                                           : ErrorCode::kBackend;
    throw Error(code, message);
  }
  if (!reply.contains("result") || !reply["result"].is_object()) {
    throw Error(ErrorCode::kBackend, "response without a result object");
  }
  return reply["result"].dump();
}

namespace {

template <typename T>
T ResultField(const json& result, const char* key) {
  try {
    return result.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kBackend, std::string("result field '") + key + "' missing or mistyped");
  }
}

json PairJson(const model::PromptAnswerPair& pair) {
  return {{"prompt", pair.prompt}, {"answer", pair.answer}};
}

}  // namespace

model::BackendMeta RemoteBackend::Meta() const {
  const json r = json::parse(Request("meta", "{}"));
  model::BackendMeta m;
  m.n_layers = ResultField<int>(r, "n_layers");
  m.d_ff = ResultField<int>(r, "d_ff");
  if (r.contains("default_temperature")) {
    m.default_temperature = ResultField<double>(r, "default_temperature");
  }
  return m;
}

std::string RemoteBackend::Generate(std::string_view prompt,
                                    const model::GenerationConfig& config) const {
  const json params = {{"prompt", prompt},
                       {"temperature", config.temperature},
                       {"max_new_tokens", config.max_new_tokens},
                       {"seed", config.trial_seed}};
  return ResultField<std::string>(json::parse(Request("generate", params.dump())), "text");
}

double RemoteBackend::AnswerLogProb(const model::PromptAnswerPair& pair) const {
  return ResultField<double>(json::parse(Request("answer_logprob", PairJson(pair).dump())),
                             "logprob");
}

model::ActivationSnapshot RemoteBackend::CaptureActivations(
    const model::PromptAnswerPair& pair) const {
  const json r = json::parse(Request("activations", PairJson(pair).dump()));
  model::ActivationSnapshot s;
  s.pair_id = pair.id;
  s.space = {ResultField<int>(r, "n_layers"), ResultField<int>(r, "d_ff")};
  s.values = ResultField<std::vector<double>>(r, "values");
  if (s.values.size() != s.space.size()) {
    throw Error(ErrorCode::kBackend, "activation vector does not match n_layers * d_ff");
  }
  return s;
}

double RemoteBackend::ActivationGradient(const model::PromptAnswerPair& pair,
                                         const NeuronRef& neuron,
                                         double alpha) const {
  json params = PairJson(pair);
  params["layer"] = neuron.layer;
  params["neuron"] = neuron.neuron;
  params["alpha"] = alpha;
  return ResultField<double>(json::parse(Request("activation_gradient", params.dump())),
                             "gradient");
}

std::unique_ptr<RemoteBackend> ConnectBackend(const std::string& address) {
  if (address.rfind("tcp://", 0) == 0) {
    const std::string rest = address.substr(6);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw Error(ErrorCode::kInvalidArgument, "expected tcp://host:port, got " + address);
    }
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad port in " + address);
    }
    return std::make_unique<RemoteBackend>(ConnectTcp(rest.substr(0, colon), port));
  }
  if (address.rfind("stdio:", 0) == 0 && address.size() > 6) {
    return std::make_unique<RemoteBackend>(SpawnStdio(address.substr(6)));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown backend address " + address);
}

}  // namespace crossrisk::protocol
