#include "beamsi/artifacts.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "beamsi/hash.hpp"

namespace beamsi {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

constexpr const char* kCheckpointSchema = "beamsi-checkpoint 1";

struct CsvFile {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const fs::path& path) {
  if (s == "nan" || s.empty()) return std::nan("");
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ArtifactError(path.string() + ": malformed number '" + s + "'");
  }
  return v;
}

std::map<std::string, std::string> read_meta(std::istream& in, std::string* first_data_line) {
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') {
      if (first_data_line) *first_data_line = line;
      break;
    }
    const auto start = line.find_first_not_of("# ");
    if (start == std::string::npos) continue;
    const std::string body = line.substr(start);
    const auto sp = body.find(' ');
    if (sp == std::string::npos) continue;
    meta[body.substr(0, sp)] = body.substr(sp + 1);
  }
  return meta;
}

CsvFile read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing artifact " + path.string());
  CsvFile f;
  std::string header;
  f.meta = read_meta(in, &header);
  f.columns = split(header, ',');
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != f.columns.size()) {
      throw ArtifactError(path.string() + ": row has " + std::to_string(cells.size()) +
                          " cells, header has " + std::to_string(f.columns.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path));
    f.rows.push_back(std::move(row));
  }
  return f;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ArtifactError("cannot write " + path.string());
  return out;
}

std::uint64_t parse_u64(const std::string& s, int base, const fs::path& path) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ArtifactError(path.string() + ": malformed integer '" + s + "'");
  }
  return v;
}

Provenance provenance_from(const std::map<std::string, std::string>& meta, const fs::path& path) {
  for (const char* key : {"tool", "config_hash", "seed", "kind"}) {
    if (!meta.count(key)) throw ArtifactError(path.string() + ": provenance line '" + key + "' missing");
  }
  Provenance p;
  p.tool = meta.at("tool");
  p.config_hash = parse_u64(meta.at("config_hash"), 16, path);
  p.seed = parse_u64(meta.at("seed"), 10, path);
  p.kind = meta.at("kind");
  return p;
}

void write_doubles(std::ostream& out, const Vec& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vec read_doubles(std::istream& in, Eigen::Index n, const fs::path& path) {
  Vec v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
    throw ArtifactError(path.string() + ": truncated parameter block");
  }
  return v;
}

std::string dims_text(const std::vector<int>& dims) {
  std::string s;
  for (int d : dims) s += (s.empty() ? "" : " ") + std::to_string(d);
  return s.empty() ? "-" : s;
}

std::map<std::string, std::string> read_checkpoint_header(std::istream& in, const fs::path& path) {
  std::string line;
  std::getline(in, line);
  if (line != kCheckpointSchema) throw ArtifactError(path.string() + ": not a checkpoint (schema line)");
  std::map<std::string, std::string> meta;
  while (std::getline(in, line)) {
    if (line == "end") return meta;
    const auto start = line.find_first_not_of("# ");
    if (start == std::string::npos) continue;
    const auto body = line.substr(start);
    const auto sp = body.find(' ');
    meta[body.substr(0, sp)] = sp == std::string::npos ? "" : body.substr(sp + 1);
  }
  throw ArtifactError(path.string() + ": checkpoint header has no 'end' line");
}

const std::string& need(const std::map<std::string, std::string>& m, const std::string& key,
                        const fs::path& path) {
  const auto it = m.find(key);
  if (it == m.end()) throw ArtifactError(path.string() + ": checkpoint header lacks '" + key + "'");
  return it->second;
}

double need_double(const std::map<std::string, std::string>& m, const std::string& key,
                   const fs::path& path) {
  return parse_number(need(m, key, path), path);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Provenance::header() const {
  return "# tool " + tool + "\n# config_hash " + hex64(config_hash) + "\n# seed " +
         std::to_string(seed) + "\n# kind " + kind + "\n";
}

Provenance read_provenance(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing artifact " + path.string());
  std::string first;
  std::getline(in, first);
  if (first == kCheckpointSchema) {
    in.seekg(0);
    return provenance_from(read_checkpoint_header(in, path), path);
  }
  in.seekg(0);
  return provenance_from(read_meta(in, nullptr), path);
}

void require_provenance(const fs::path& path, std::uint64_t config_hash, const std::string& kind) {
  const auto p = read_provenance(path);
  if (p.kind != kind) {
    throw ArtifactError(path.string() + ": expected a '" + kind + "' artifact, found '" + p.kind + "'");
  }
  if (p.config_hash != config_hash) {
    throw ArtifactError(path.string() + " was produced by config " + hex64(p.config_hash) +
                        ", current config is " + hex64(config_hash) +
                        "; rerun generate/train with this config");
  }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header() << "t";
  for (int i = 0; i < traj.nodes(); ++i) out << ",u" << i;
  out << "\n";
  for (Eigen::Index k = 0; k < traj.times().size(); ++k) {
    out << format_number(traj.times()[k]);
    for (int i = 0; i < traj.nodes(); ++i) out << "," << format_number(traj.states()(k, i));
    out << "\n";
  }
}

Trajectory read_trajectory_csv(const fs::path& path) {
  const auto f = read_csv(path);
  if (f.columns.size() < 2 || f.columns[0] != "t" || f.rows.empty()) {
    throw ArtifactError(path.string() + ": not a trajectory CSV");
  }
  const int n = static_cast<int>(f.columns.size()) - 1;
  Vec times(static_cast<Eigen::Index>(f.rows.size()));
  Mat states = Mat::Zero(static_cast<Eigen::Index>(f.rows.size()), 2 * n);
  for (std::size_t k = 0; k < f.rows.size(); ++k) {
    times[k] = f.rows[k][0];
    for (int i = 0; i < n; ++i) states(k, i) = f.rows[k][i + 1];
  }
  return {times, states};
}

void write_fields_csv(const fs::path& path, const SpatialGrid& grid, const ParameterField& fields,
                      const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header() << "x,modulus,damping\n";
  const int n = grid.size();
  for (int i = 0; i < n + 2; ++i) {
    const double c = i == 0 || i == n + 1 ? std::nan("") : fields.damping()[i - 1];
    out << format_number(grid.coordinate(i)) << "," << format_number(fields.modulus()[i]) << ","
        << format_number(c) << "\n";
  }
}

ParameterField read_fields_csv(const fs::path& path) {
  const auto f = read_csv(path);
  if (f.columns != std::vector<std::string>{"x", "modulus", "damping"} || f.rows.size() < 3) {
    throw ArtifactError(path.string() + ": not a parameter-field CSV");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(f.rows.size());
  Vec p(m), c(m - 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    p[i] = f.rows[i][1];
    if (i > 0 && i < m - 1) c[i - 1] = f.rows[i][2];
  }
  return {p, c};
}

void write_samples_csv(const fs::path& path, const SampleSet& samples, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header() << "# nodes " << samples.nodes() << "\n# saves " << samples.saves()
      << "\n# ratio " << format_number(samples.ratio()) << "\n# sample_hash "
      << hex64(samples.hash()) << "\nnode,save,value\n";
  for (const auto& s : samples.samples()) {
    out << s.node << "," << s.save << "," << format_number(s.value) << "\n";
  }
}

SampleSet read_samples_csv(const fs::path& path) {
  const auto f = read_csv(path);
  if (f.columns != std::vector<std::string>{"node", "save", "value"}) {
    throw ArtifactError(path.string() + ": not a sample CSV");
  }
  for (const char* key : {"nodes", "saves", "ratio", "seed"}) {
    if (!f.meta.count(key)) throw ArtifactError(path.string() + ": header lacks '" + key + "'");
  }
  std::vector<Sample> s;
  s.reserve(f.rows.size());
  for (const auto& r : f.rows) s.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), r[2]});
  SampleSet set(std::move(s), std::stoi(f.meta.at("nodes")), std::stoi(f.meta.at("saves")),
                parse_u64(f.meta.at("seed"), 10, path), parse_number(f.meta.at("ratio"), path));
  if (f.meta.count("sample_hash") && hex64(set.hash()) != f.meta.at("sample_hash")) {
    throw ArtifactError(path.string() + ": sample hash mismatch (file edited or corrupted)");
  }
  return set;
}

void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history,
                       const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header() << "epoch,mean_loss,lr,frechet_P,frechet_C\n";
  for (const auto& r : history) {
    out << r.epoch << "," << format_number(r.mean_loss) << "," << format_number(r.lr) << ","
        << format_number(r.frechet_modulus) << "," << format_number(r.frechet_damping) << "\n";
  }
}

void write_baseline_history_csv(const fs::path& path, const std::vector<BaselineEpoch>& history,
                                const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header() << "epoch,total,data,pde,boundary,accepted\n";
  for (const auto& r : history) {
    out << r.epoch << "," << format_number(r.loss.total) << "," << format_number(r.loss.data) << ","
        << format_number(r.loss.pde) << "," << format_number(r.loss.boundary) << ","
        << (r.accepted ? 1 : 0) << "\n";
  }
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsReport>& reports,
                       const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header()
      << "method,interpolation_mae,extrapolation_mae,peak_error_ratio,"
         "extrapolation_peak_error_ratio,frechet_P,frechet_C,frechet_P_normalized,"
         "frechet_C_normalized\n";
  for (const auto& r : reports) {
    const bool fields = r.method == "neuralsi";
    const auto opt = [&](double v) { return fields ? format_number(v) : std::string(); };
    out << r.method << "," << format_number(r.interpolation_mae) << ","
        << format_number(r.extrapolation_mae) << "," << format_number(r.peak_error_ratio) << ","
        << format_number(r.extrapolation_peak_error_ratio) << "," << opt(r.frechet_modulus) << ","
        << opt(r.frechet_damping) << "," << opt(r.frechet_modulus_normalized) << ","
        << opt(r.frechet_damping_normalized) << "\n";
  }
}

void save_checkpoint(const fs::path& path, const MlpModel& model, const AdamWState& optimizer,
                     const Provenance& prov) {
  const auto& c = model.config();
  const auto& a = optimizer.config();
  const Vec p = model.parameters();
  const bool has_moments = optimizer.first_moment().size() == p.size();
  auto out = open_out(path, true);
  out << kCheckpointSchema << "\n"
      << "tool " << prov.tool << "\nconfig_hash " << hex64(prov.config_hash) << "\nseed "
      << prov.seed << "\nkind " << prov.kind << "\n"
      << "dims_trunk " << dims_text(model.layer_dims(0)) << "\n"
      << "dims_modulus " << dims_text(model.layer_dims(1)) << "\n"
      << "dims_damping " << dims_text(model.layer_dims(2)) << "\n"
      << "hidden_layers " << c.hidden_layers << "\nhidden_units " << c.hidden_units << "\n"
      << "shared_trunk " << (c.shared_trunk ? 1 : 0) << "\n"
      << "embedding_dim " << c.embedding.dimension << "\nembedding_base "
      << format_number(c.embedding.base) << "\n"
      << "modulus_min " << format_number(c.modulus_min) << "\nmodulus_max "
      << format_number(c.modulus_max) << "\n"
      << "adamw " << format_number(a.beta1) << " " << format_number(a.beta2) << " "
      << format_number(a.epsilon) << " " << format_number(a.weight_decay) << "\n"
      << "step " << optimizer.step() << "\nparameters " << p.size() << "\nmoments "
      << (has_moments ? 1 : 0) << "\nend\n";
  write_doubles(out, p);
  if (has_moments) {
    write_doubles(out, optimizer.first_moment());
    write_doubles(out, optimizer.second_moment());
  }
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing checkpoint " + path.string() + "; run 'train' first");
  const auto m = read_checkpoint_header(in, path);
  if (need(m, "kind", path) != "checkpoint_neuralsi") {
    throw ArtifactError(path.string() + ": not a NeuralSI checkpoint");
  }
  NetConfig c;
  c.hidden_layers = std::stoi(need(m, "hidden_layers", path));
  c.hidden_units = std::stoi(need(m, "hidden_units", path));
  c.shared_trunk = need(m, "shared_trunk", path) == "1";
  c.embedding.dimension = std::stoi(need(m, "embedding_dim", path));
  c.embedding.base = need_double(m, "embedding_base", path);
  c.modulus_min = need_double(m, "modulus_min", path);
  c.modulus_max = need_double(m, "modulus_max", path);
  Checkpoint ck{provenance_from(m, path), MlpModel::initialize(c, 0), {}};
  if (dims_text(ck.model.layer_dims(0)) != need(m, "dims_trunk", path) ||
      dims_text(ck.model.layer_dims(1)) != need(m, "dims_modulus", path) ||
      dims_text(ck.model.layer_dims(2)) != need(m, "dims_damping", path)) {
    throw ArtifactError(path.string() + ": layer dims disagree with the network config");
  }
  const auto n = static_cast<Eigen::Index>(std::stol(need(m, "parameters", path)));
  if (n != ck.model.parameter_count()) throw ArtifactError(path.string() + ": parameter count mismatch");
  std::istringstream adam(need(m, "adamw", path));
  std::string b1, b2, eps, wd;
  adam >> b1 >> b2 >> eps >> wd;
  const AdamWConfig ac{parse_number(b1, path), parse_number(b2, path), parse_number(eps, path),
                       parse_number(wd, path)};
  ck.model.set_parameters(read_doubles(in, n, path));
  ck.optimizer = AdamWState(n, ac);
  if (need(m, "moments", path) == "1") {
    Vec mm = read_doubles(in, n, path), vv = read_doubles(in, n, path);
    ck.optimizer.restore(std::move(mm), std::move(vv), std::stol(need(m, "step", path)));
  }
  return ck;
}

void save_regressor(const fs::path& path, const RegressorModel& model, const Provenance& prov) {
  const auto& c = model.config();
  const Vec p = model.parameters();
  auto out = open_out(path, true);
  out << kCheckpointSchema << "\n"
      << "tool " << prov.tool << "\nconfig_hash " << hex64(prov.config_hash) << "\nseed "
      << prov.seed << "\nkind " << prov.kind << "\n"
      << "hidden_layers " << c.hidden_layers << "\nhidden_units " << c.hidden_units << "\n"
      << "activation " << (c.activation == Activation::tanh ? "tanh" : "identity") << "\n"
      << "boundary_factor " << (c.boundary_factor ? 1 : 0) << "\n"
      << "length " << format_number(model.length()) << "\nduration "
      << format_number(model.duration()) << "\noutput_scale " << format_number(model.output_scale())
      << "\nparameters " << p.size() << "\nend\n";
  write_doubles(out, p);
}

RegressorCheckpoint load_regressor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing checkpoint " + path.string() + "; run 'train' first");
  const auto m = read_checkpoint_header(in, path);
  RegressorConfig c;
  c.hidden_layers = std::stoi(need(m, "hidden_layers", path));
  c.hidden_units = std::stoi(need(m, "hidden_units", path));
  c.activation = need(m, "activation", path) == "identity" ? Activation::identity : Activation::tanh;
  c.boundary_factor = need(m, "boundary_factor", path) == "1";
  RegressorCheckpoint ck{provenance_from(m, path),
                         RegressorModel::initialize(c, need_double(m, "length", path),
                                                    need_double(m, "duration", path), 0)};
  ck.model.set_output_scale(need_double(m, "output_scale", path));
  const auto n = static_cast<Eigen::Index>(std::stol(need(m, "parameters", path)));
  if (n != ck.model.parameter_count()) throw ArtifactError(path.string() + ": parameter count mismatch");
  ck.model.set_parameters(read_doubles(in, n, path));
  return ck;
}

}  // namespace beamsi
