#include "beamsi/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "beamsi/hash.hpp"
#include "beamsi/plots.hpp"

namespace beamsi {

namespace {

void emit(const LogSink& log, const std::string& line) {
  if (log) log(line);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* method_colour(Method m) {
  switch (m) {
    case Method::neuralsi: return "#d62728";
    case Method::dnn: return "#2ca02c";
    case Method::pinn: return "#9467bd";
  }
  return "#000000";
}

Vec save_times(const Trajectory& t) { return t.times(); }

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "neuralsi") return Method::neuralsi;
  if (name == "dnn") return Method::dnn;
  if (name == "pinn") return Method::pinn;
  throw ConfigError("unknown method '" + name + "' (expected neuralsi, dnn or pinn)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::neuralsi: return "neuralsi";
    case Method::dnn: return "dnn";
    case Method::pinn: return "pinn";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "layers") return SweepAxis::layers;
  if (name == "ratio") return SweepAxis::ratio;
  if (name == "batch") return SweepAxis::batch;
  throw ConfigError("unknown sweep axis '" + name + "' (expected layers, ratio or batch)");
}

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::layers: return "layers";
    case SweepAxis::ratio: return "ratio";
    case SweepAxis::batch: return "batch";
  }
  return "?";
}

Provenance provenance_for(const RunConfig& cfg, const std::string& kind) {
  return {kToolVersion, config_hash(cfg), cfg.seed, kind};
}

void cmd_generate(const RunConfig& cfg, const fs::path& out, const LogSink& log) {
  cfg.validate();
  const RunLayout L{out};
  const BeamProblem problem = cfg.problem();
  const auto fields = problem.truth_fields();
  const auto truth = solve(problem, fields);
  const auto extended = solve(problem.extended(cfg.extrapolation_multiplier), fields);
  const auto samples = draw_samples(truth, cfg.train.sample_ratio, cfg.seed);

  fs::create_directories(out);
  write_text_file(L.config(), to_text(cfg));
  write_trajectory_csv(L.truth(), truth, provenance_for(cfg, "truth"));
  write_trajectory_csv(L.truth_extended(), extended, provenance_for(cfg, "truth_extended"));
  write_fields_csv(L.truth_fields(), problem.grid(), fields, provenance_for(cfg, "fields_truth"));
  write_samples_csv(L.samples(), samples, provenance_for(cfg, "samples"));
  emit(log, "generate: " + std::to_string(problem.nodes) + " nodes x " +
                std::to_string(problem.solver.n_save) + " saves, step " + sci(*problem.solver.step) +
                " s, " + std::to_string(samples.size()) + " samples (hash " + hex64(samples.hash()) +
                ") -> " + out.string());
}

void cmd_train(const RunConfig& cfg, Method method, const fs::path& out, const LogSink& log) {
  cfg.validate();
  const RunLayout L{out};
  const auto hash = config_hash(cfg);
  if (!fs::exists(L.samples())) {
    throw ArtifactError("no sample set in " + out.string() + "; run 'generate' with this config first");
  }
  require_provenance(L.samples(), hash, "samples");
  const SampleSet samples = read_samples_csv(L.samples());
  const BeamProblem problem = cfg.problem();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string name = method_name(method);

  if (method == Method::neuralsi) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const auto reference = problem.truth_fields();
    const auto on_epoch = [&](const EpochRecord& r) {
      emit(log, "neuralsi epoch " + std::to_string(r.epoch) + "/" + std::to_string(tc.epochs) +
                    " loss " + sci(r.mean_loss) + " lr " + sci(r.lr) + " frechet_P " +
                    sci(r.frechet_modulus) + " frechet_C " + sci(r.frechet_damping) +
                    (r.skipped ? " skipped " + std::to_string(r.skipped) : ""));
    };
    const auto on_warning = [&](const std::string& w) { emit(log, "warning: " + w); };
    const auto res = train(problem, samples, MlpModel::initialize(cfg.net, cfg.seed), tc, &reference,
                           on_epoch, on_warning);
    save_checkpoint(L.checkpoint(method), res.model, res.optimizer,
                    provenance_for(cfg, "checkpoint_neuralsi"));
    write_history_csv(L.history(method), res.history, provenance_for(cfg, "history_neuralsi"));
    write_fields_csv(L.identified_fields(), problem.grid(), forward_fields(res.model, problem.grid()).fields,
                     provenance_for(cfg, "fields_neuralsi"));
  } else {
    BaselineConfig bc = method == Method::dnn ? cfg.dnn : cfg.pinn;
    bc.seed = cfg.seed;
    if (method == Method::dnn) bc.weights = {1.0, 0.0, 0.0};
    const int every = std::max(1, bc.epochs / 20);
    const auto on_epoch = [&](const BaselineEpoch& e) {
      if (e.epoch % every != 0 && e.epoch != bc.epochs) return;
      emit(log, name + " iteration " + std::to_string(e.epoch) + "/" + std::to_string(bc.epochs) +
                    " loss " + sci(e.loss.total) + " data " + sci(e.loss.data) + " pde " +
                    sci(e.loss.pde) + " bc " + sci(e.loss.boundary));
    };
    const auto on_warning = [&](const std::string& w) { emit(log, "warning: " + w); };
    const auto res = train_regressor(problem, samples, bc, on_epoch, on_warning);
    save_regressor(L.checkpoint(method), res.model, provenance_for(cfg, "checkpoint_" + name));
    write_baseline_history_csv(L.history(method), res.history, provenance_for(cfg, "history_" + name));
  }
  emit(log, name + ": trained in " + std::to_string(seconds_since(t0)) + " s -> " +
                L.checkpoint(method).string());
}

std::vector<MetricsReport> cmd_eval(const RunConfig& cfg, const fs::path& out,
                                    std::vector<Method> methods, const LogSink& log) {
  cfg.validate();
  const RunLayout L{out};
  const auto hash = config_hash(cfg);
  if (methods.empty()) {
    for (Method m : {Method::neuralsi, Method::dnn, Method::pinn}) {
      if (fs::exists(L.checkpoint(m))) methods.push_back(m);
    }
    if (methods.empty()) {
      throw ArtifactError("no checkpoints in " + out.string() + "; run 'train' first");
    }
  }
  require_provenance(L.truth_extended(), hash, "truth_extended");
  const Trajectory truth = read_trajectory_csv(L.truth_extended());
  const BeamProblem problem = cfg.problem();
  const BeamProblem long_problem = problem.extended(cfg.extrapolation_multiplier);
  if (truth.nodes() != problem.nodes || truth.save_count() != long_problem.solver.n_save) {
    throw ArtifactError(L.truth_extended().string() + ": shape does not match the config");
  }
  const SpatialGrid grid = problem.grid();
  const auto reference = problem.truth_fields();

  std::vector<MetricsReport> reports;
  std::vector<std::pair<Method, Trajectory>> predictions;
  std::string timing = "method  inference_seconds\n";
  std::vector<Series> modulus_curves{{"truth", grid.all_coordinates(), reference.modulus(), "#000000", true}};
  std::vector<Series> damping_curves{
      {"truth", grid.interior_coordinates(), reference.damping(), "#000000", true}};

  for (Method m : methods) {
    const std::string name = method_name(m);
    require_provenance(L.checkpoint(m), hash, "checkpoint_" + name);
    MetricsReport r;
    r.method = name;
    Trajectory pred;
    const auto t0 = std::chrono::steady_clock::now();
    if (m == Method::neuralsi) {
      const auto ck = load_checkpoint(L.checkpoint(m));
      const auto fields = forward_fields(ck.model, grid).fields;
      pred = extrapolate(problem, fields, cfg.extrapolation_multiplier);
      r.inference_seconds = seconds_since(t0);
      const auto fp = compare_fields(grid, fields.interior_modulus(), reference.interior_modulus());
      const auto fc = compare_fields(grid, fields.damping(), reference.damping());
      r.frechet_modulus = fp.raw;
      r.frechet_modulus_normalized = fp.normalized;
      r.frechet_damping = fc.raw;
      r.frechet_damping_normalized = fc.normalized;
      modulus_curves.push_back({"neuralsi", grid.all_coordinates(), fields.modulus(), method_colour(m)});
      damping_curves.push_back({"neuralsi", grid.interior_coordinates(), fields.damping(), method_colour(m)});
    } else {
      const auto ck = load_regressor(L.checkpoint(m));
      pred = predict_trajectory(ck.model, long_problem);
      r.inference_seconds = seconds_since(t0);
    }
    score_responses(r, truth, pred, problem.solver.n_save);
    write_trajectory_csv(L.prediction(m), pred, provenance_for(cfg, "prediction_" + name));
    char line[96];
    std::snprintf(line, sizeof line, "%-8s %.6f\n", name.c_str(), r.inference_seconds);
    timing += line;
    emit(log, name + ": interpolation MAE " + sci(r.interpolation_mae) + ", extrapolation MAE " +
                  sci(r.extrapolation_mae) + ", peak error ratio " + sci(r.peak_error_ratio) +
                  (m == Method::neuralsi ? ", frechet_P " + sci(r.frechet_modulus) +
                                               " (normalized " + sci(r.frechet_modulus_normalized) + ")"
                                         : ""));
    reports.push_back(r);
    predictions.emplace_back(m, std::move(pred));
  }

  write_metrics_csv(L.metrics(), reports, provenance_for(cfg, "metrics"));
  write_text_file(L.timing(), timing);

  const Mat truth_u = truth.displacements().bottomRows(truth.save_count());
  write_text_file(L.plots() / "field_truth.svg", heatmap_svg("ground truth displacement (m)", truth_u));
  const int mid = midspan_node(problem.nodes);
  std::vector<Series> mid_curves{{"truth", save_times(truth), elemental_response(truth, mid), "#000000", true}};
  for (const auto& [m, pred] : predictions) {
    const std::string name = method_name(m);
    const Mat pu = pred.displacements().bottomRows(pred.save_count());
    write_text_file(L.plots() / ("field_" + name + ".svg"), heatmap_svg(name + " displacement (m)", pu));
    write_text_file(L.plots() / ("error_" + name + ".svg"),
                    heatmap_svg(name + " error (m)", pu - truth_u, true));
    mid_curves.push_back({name, save_times(pred), elemental_response(pred, mid), method_colour(m)});
  }
  write_text_file(L.plots() / "midspan_response.svg",
                  line_plot_svg("midspan displacement", "t (s)", "u (m)", mid_curves));
  if (modulus_curves.size() > 1) {
    write_text_file(L.plots() / "modulus.svg", line_plot_svg("modulus coefficient P", "x (m)", "P", modulus_curves));
    write_text_file(L.plots() / "damping.svg", line_plot_svg("damping C", "x (m)", "C", damping_curves));
  }
  return reports;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                                const fs::path& out, int threads, const LogSink& log) {
  cfg.validate();
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (threads <= 0) {
    const char* env = std::getenv("BEAMSI_THREADS");
    threads = env ? std::max(1, std::atoi(env)) : 1;
  }
  std::vector<SweepRow> rows(values.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  const auto locked_log = [&](const std::string& s) {
    std::lock_guard<std::mutex> g(mu);
    emit(log, s);
  };

  const auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow row;
      row.value = values[i];
      RunConfig c = cfg;
      const std::string label = axis_name(axis) + "_" + short_number(values[i]);
      const fs::path dir = out / label;
      try {
        switch (axis) {
          case SweepAxis::layers: c.net.hidden_layers = static_cast<int>(std::lround(values[i])); break;
          case SweepAxis::ratio: c.train.sample_ratio = values[i]; break;
          case SweepAxis::batch: c.train.batch_size = static_cast<int>(std::lround(values[i])); break;
        }
        c.out_dir = dir.string();
        c.validate();
        const LogSink cell_log = [&](const std::string& s) { locked_log("[" + label + "] " + s); };
        cmd_generate(c, dir, cell_log);
        cmd_train(c, Method::neuralsi, dir, cell_log);
        const auto reports = cmd_eval(c, dir, {Method::neuralsi}, cell_log);
        row.report = reports.front();
        std::ifstream h(RunLayout{dir}.history(Method::neuralsi));
        row.ok = true;
        const SampleSet samples = read_samples_csv(RunLayout{dir}.samples());
        row.final_loss = sample_loss(c.problem(), load_checkpoint(RunLayout{dir}.checkpoint(Method::neuralsi)).model,
                                     samples);
      } catch (const std::exception& e) {
        row.ok = false;
        row.message = e.what();
        locked_log("[" + label + "] failed: " + row.message);
      }
      std::lock_guard<std::mutex> g(mu);
      rows[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  fs::create_directories(out);
  std::ofstream csv(out / ("sweep_" + axis_name(axis) + ".csv"));
  if (!csv) throw ArtifactError("cannot write sweep CSV in " + out.string());
  csv << provenance_for(cfg, "sweep_" + axis_name(axis)).header()
      << "axis,value,status,interpolation_mae,extrapolation_mae,peak_error_ratio,final_loss,"
         "frechet_P,frechet_C,frechet_P_normalized,frechet_C_normalized,message\n";
  for (const auto& r : rows) {
    std::string msg = r.message;
    for (char& ch : msg)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << axis_name(axis) << "," << short_number(r.value) << "," << (r.ok ? "ok" : "failed");
    if (r.ok) {
      const auto& m = r.report;
      csv << "," << format_number(m.interpolation_mae) << "," << format_number(m.extrapolation_mae)
          << "," << format_number(m.peak_error_ratio) << "," << format_number(r.final_loss) << ","
          << format_number(m.frechet_modulus) << "," << format_number(m.frechet_damping) << ","
          << format_number(m.frechet_modulus_normalized) << ","
          << format_number(m.frechet_damping_normalized);
    } else {
      csv << ",,,,,,,,";
    }
    csv << "," << msg << "\n";
  }
  return rows;
}

}  // namespace beamsi
