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

// crossrisk: command-line driver for the study stages.
//
// Exit status: 0 success, 1 configuration error, 2 partial failure,
// 3 backend unreachable.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "crossrisk/io.hpp"
#include "crossrisk/pipeline.hpp"
#include "crossrisk/protocol.hpp"

namespace {

namespace fs = std::filesystem;
using crossrisk::Error;
using crossrisk::ErrorCode;
namespace pipeline = crossrisk::pipeline;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUnreachable = 3;

struct Overrides {
  std::string config;
  std::string backend;
  std::string defense_backend;
  std::string out;
  std::optional<int> workers;
  std::optional<int> steps;
  std::optional<double> z;
  std::optional<double> p;
  std::string band;
  std::optional<int> trials;
};

pipeline::StudyConfig Load(const Overrides& o) {
  pipeline::StudyConfig c = pipeline::LoadStudyConfig(o.config);
  if (!o.backend.empty()) c.base_backend = o.backend;
  if (!o.defense_backend.empty()) c.defense_backend = o.defense_backend;
  if (o.workers) c.workers = *o.workers;
  if (o.steps) c.ig.steps = *o.steps;
  if (o.z) c.selection.z_percent = *o.z;
  if (o.p) c.selection.p_percent = *o.p;
  if (o.trials) c.trials = *o.trials;
  if (!o.band.empty()) {
    const std::size_t comma = o.band.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--band expects lo,hi");
    }
    try {
      c.band = {std::stod(o.band.substr(0, comma)), std::stod(o.band.substr(comma + 1))};
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--band expects two numbers: " + o.band);
    }
  }
  pipeline::ValidateStudyConfig(c);
  return c;
}

std::shared_ptr<const crossrisk::model::Backend> Need(const std::string& address,
                                                      const char* what) {
  if (address.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("no ") + what + " backend given");
  }
  return pipeline::OpenBackend(address);
}

int Finish(const std::string& stage, const pipeline::StageStatus& status) {
  std::cout << stage << ": " << (status.partial ? "partial" : "ok") << "\n";
  for (const std::string& w : status.warnings) std::cout << "  warning: " << w << "\n";
  return status.partial ? kExitPartial : kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBackendUnreachable:
      return kExitUnreachable;
    case ErrorCode::kBackend:
    case ErrorCode::kNonFinite:
    case ErrorCode::kNoConflictNeurons:
      return kExitPartial;
    default:
      return kExitConfig;
  }
}

void AddCommon(CLI::App* cmd, Overrides& o, bool config_required = true) {
  auto* opt = cmd->add_option("--config", o.config, "Study config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

int Serve(const std::string& address, const std::string& listen) {
  const auto backend = pipeline::OpenBackend(address);
  if (listen == "stdio") {
    crossrisk::protocol::ServeStream(*backend, std::cin, std::cout);
    return kExitOk;
  }
  if (listen.rfind("tcp://", 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "--listen expects stdio or tcp://host:port");
  }
  const std::string rest = listen.substr(6);
  const std::size_t colon = rest.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "--listen expects tcp://host:port");
  }
  int port = 0;
  try {
    port = std::stoi(rest.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in " + listen);
  }
  crossrisk::protocol::TcpServer server(*backend, rest.substr(0, colon), port);
  std::cerr << "listening on " << rest.substr(0, colon) << ":" << server.port() << std::endl;
  server.Run();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-risk analysis of base/defense model pairs"};
  app.require_subcommand(1);
  Overrides o;

  auto* evaluate = app.add_subcommand("evaluate", "Run and score every task on one backend");
  AddCommon(evaluate, o);
  evaluate->add_option("--backend", o.backend, "Backend address (default: config base)");
  evaluate->add_option("--trials", o.trials, "Trials per item")->check(CLI::PositiveNumber);

  std::string before, after, model_pair;
  auto* quantify = app.add_subcommand("quantify", "RCR, t-test and radar from two evaluate dirs");
  quantify->add_option("--before", before, "Evaluate output of the base model")->required();
  quantify->add_option("--after", after, "Evaluate output of the defense model")->required();
  quantify->add_option("--out", o.out, "Output directory")->required();
  quantify->add_option("--config", o.config, "Study config (for the model pair name)");
  quantify->add_option("--name", model_pair, "Model pair name");

  auto* attribute = app.add_subcommand("attribute", "Neuron attribution and risk profiles");
  AddCommon(attribute, o);
  attribute->add_option("--backend", o.backend, "Base backend (default: config base)");
  attribute->add_option("--steps", o.steps, "Riemann steps")->check(CLI::PositiveNumber);
  attribute->add_option("--z", o.z, "Top-z percent per prompt");
  attribute->add_option("--p", o.p, "Support percent across prompts");

  auto* entangle = app.add_subcommand("entangle", "Entangled and conflict neurons");
  AddCommon(entangle, o);

  std::string quant_path;
  auto* trend = app.add_subcommand("trend", "Activation deltas, N_trend and verdicts");
  AddCommon(trend, o);
  trend->add_option("--backend", o.backend, "Base backend (default: config base)");
  trend->add_option("--defense-backend", o.defense_backend, "Defense backend");
  trend->add_option("--quant", quant_path, "Quantification rows (default: <out>/quant.jsonl)");
  trend->add_option("--band", o.band, "Uncertainty band lo,hi");

  auto* report = app.add_subcommand("report", "Render report.md from stage outputs");
  report->add_option("--out", o.out, "Study directory")->required();

  auto* run = app.add_subcommand("run", "Every stage in order");
  AddCommon(run, o);
  run->add_option("--backend", o.backend, "Base backend");
  run->add_option("--defense-backend", o.defense_backend, "Defense backend");
  run->add_option("--steps", o.steps, "Riemann steps")->check(CLI::PositiveNumber);
  run->add_option("--z", o.z, "Top-z percent per prompt");
  run->add_option("--p", o.p, "Support percent across prompts");
  run->add_option("--band", o.band, "Uncertainty band lo,hi");
  run->add_option("--trials", o.trials, "Trials per item")->check(CLI::PositiveNumber);

  std::string listen = "stdio";
  auto* serve = app.add_subcommand("serve", "Serve a backend over the wire protocol");
  serve->add_option("--backend", o.backend, "Backend address")->required();
  serve->add_option("--listen", listen, "stdio or tcp://host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const fs::path out(o.out);
    if (evaluate->parsed()) {
      const auto c = Load(o);
      return Finish("evaluate", pipeline::Evaluate(c, *Need(c.base_backend, "base"), out));
    }
    if (quantify->parsed()) {
      std::string name = model_pair;
      if (name.empty() && !o.config.empty()) name = pipeline::LoadStudyConfig(o.config).model_pair;
      if (name.empty()) name = "study";
      return Finish("quantify", pipeline::Quantify(name, before, after, out));
    }
    if (attribute->parsed()) {
      const auto c = Load(o);
      return Finish("attribute", pipeline::Attribute(c, *Need(c.base_backend, "base"), out));
    }
    if (entangle->parsed()) {
      return Finish("entangle", pipeline::Entangle(Load(o), out));
    }
    if (trend->parsed()) {
      const auto c = Load(o);
      const fs::path q = quant_path.empty() ? out / "quant.jsonl" : fs::path(quant_path);
      return Finish("trend", pipeline::Trend(c, *Need(c.base_backend, "base"),
                                             *Need(c.defense_backend, "defense"), out, q));
    }
    if (report->parsed()) {
      const std::string text = pipeline::RenderReport(out);
      crossrisk::io::WriteFile(out / "report.md", text);
      std::cout << text;
      return kExitOk;
    }
    if (run->parsed()) {
      const auto c = Load(o);
      return Finish("run", pipeline::RunStudy(c, *Need(c.base_backend, "base"),
                                              *Need(c.defense_backend, "defense"), out));
    }
    if (serve->parsed()) return Serve(o.backend, listen);
  } catch (const Error& e) {
    std::cerr << "error [" << crossrisk::ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
