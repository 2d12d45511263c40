// beamsi generate|train|eval|sweep --config <path> [options]
//
// Exit codes: 0 ok, 2 config, 3 numerical, 4 missing or mismatched artifact.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "beamsi/errors.hpp"
#include "beamsi/pipeline.hpp"

namespace {

int exit_code(beamsi::ErrorKind k) {
  switch (k) {
    case beamsi::ErrorKind::Config: return 2;
    case beamsi::ErrorKind::Numerical: return 3;
    case beamsi::ErrorKind::Artifact: return 4;
  }
  return 1;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    const std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw beamsi::ConfigError("--values: cannot parse '" + item + "'");
    out.push_back(v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural identification of a simply supported beam"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", beamsi::kToolVersion);

  std::string config_path, method, axis, values, out;
  std::optional<std::uint64_t> seed;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out, "output directory (default: run.out_dir)");
    sub->add_option("--seed", seed, "overrides run.seed");
  };
  auto* gen = app.add_subcommand("generate", "simulate ground truth and draw samples");
  common(gen);
  auto* trn = app.add_subcommand("train", "train one method on the generated samples");
  common(trn);
  trn->add_option("--method", method, "neuralsi, dnn or pinn")->required();
  auto* evl = app.add_subcommand("eval", "score trained methods");
  common(evl);
  evl->add_option("--method", method, "neuralsi, dnn, pinn or all (default: every checkpoint present)");
  auto* swp = app.add_subcommand("sweep", "NeuralSI over a hyperparameter grid");
  common(swp);
  swp->add_option("--axis", axis, "layers, ratio or batch")->required();
  swp->add_option("--values", values, "comma separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto log = [](const std::string& line) { std::cout << line << std::endl; };
  try {
    beamsi::RunConfig cfg = beamsi::load_config(config_path);
    if (seed) cfg.seed = *seed;
    const beamsi::fs::path dir = out.empty() ? beamsi::fs::path(cfg.out_dir) : beamsi::fs::path(out);
    if (*gen) {
      beamsi::cmd_generate(cfg, dir, log);
    } else if (*trn) {
      beamsi::cmd_train(cfg, beamsi::parse_method(method), dir, log);
    } else if (*evl) {
      std::vector<beamsi::Method> methods;
      if (!method.empty() && method != "all") methods.push_back(beamsi::parse_method(method));
      beamsi::cmd_eval(cfg, dir, methods, log);
    } else if (*swp) {
      const auto rows = beamsi::cmd_sweep(cfg, beamsi::parse_axis(axis), parse_values(values), dir, 0, log);
      int failed = 0;
      for (const auto& r : rows) failed += r.ok ? 0 : 1;
      log("sweep: " + std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) +
          " cells ok -> " + (dir / ("sweep_" + axis + ".csv")).string());
    }
  } catch (const beamsi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
