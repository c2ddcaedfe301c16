#include "hyperfe/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hyperfe/hash.hpp"

namespace hyperfe {

static_assert(std::endian::native == std::endian::little,
              "blob layout assumes a little-endian host");

std::string hash_to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t hex_to_hash(const std::string& s) {
  if (s.empty() || s.size() > 16 ||
      s.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw std::invalid_argument("hex_to_hash: malformed hash '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

void put_kv(std::string& h, const char* key, const std::string& value) {
  h += key;
  h += ' ';
  h += value;
  h += '\n';
}

struct Artifact {
  std::string kind;
  std::map<std::string, std::string> kv;
  std::vector<double> blob;

  const std::string& get(const std::string& key) const {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error("artifact missing key '" + key + "'");
    return it->second;
  }
  double get_double(const std::string& key) const {
    return parse_double(get(key));
  }
  long get_long(const std::string& key) const {
    return static_cast<long>(parse_double(get(key)));
  }
  std::uint64_t get_u64(const std::string& key) const {
    return std::stoull(get(key));
  }
  std::vector<int> get_ints(const std::string& key) const {
    std::istringstream in(get(key));
    std::vector<int> out;
    int v;
    while (in >> v) out.push_back(v);
    return out;
  }
};

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

void write_artifact(const std::string& path, const std::string& kind,
                    const std::string& header_kv,
                    const std::vector<double>& blob) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "hyperfe " << kind << " v1\n" << header_kv;
  os << "blob " << blob.size() << "\n";
  os.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

Artifact read_artifact(const std::string& path,
                       const std::string& expect_kind) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  Artifact a;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty artifact '" + path + "'");
  {
    std::istringstream head(line);
    std::string tag, version;
    head >> tag >> a.kind >> version;
    if (tag != "hyperfe" || version != "v1" || a.kind != expect_kind)
      throw std::runtime_error("'" + path + "' is not a hyperfe " +
                               expect_kind + " artifact");
  }
  std::size_t blob_count = 0;
  bool have_blob = false;
  while (std::getline(is, line)) {
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string value =
        space == std::string::npos ? std::string() : line.substr(space + 1);
    if (key == "blob") {
      blob_count = static_cast<std::size_t>(std::stoull(value));
      have_blob = true;
      break;
    }
    a.kv[key] = value;
  }
  if (!have_blob)
    throw std::runtime_error("'" + path + "' has no blob section");
  a.blob.resize(blob_count);
  is.read(reinterpret_cast<char*>(a.blob.data()),
          static_cast<std::streamsize>(blob_count * sizeof(double)));
  if (static_cast<std::size_t>(is.gcount()) != blob_count * sizeof(double))
    throw std::runtime_error("'" + path + "' is truncated");
  return a;
}

void append_matrix(std::vector<double>& blob, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) blob.push_back(m(r, c));
}

Eigen::MatrixXd take_matrix(const std::vector<double>& blob, std::size_t& pos,
                            Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = blob.at(pos++);
  return m;
}

Eigen::VectorXd take_vector(const std::vector<double>& blob, std::size_t& pos,
                            Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = blob.at(pos++);
  return v;
}

}  // namespace

void write_snapshots(const std::string& path, const SnapshotMatrix& snap,
                     std::uint64_t config_hash) {
  std::string h;
  put_kv(h, "rows", std::to_string(snap.U.rows()));
  put_kv(h, "cols", std::to_string(snap.U.cols()));
  put_kv(h, "L", format_double(snap.L));
  put_kv(h, "magnitude", format_double(snap.magnitude));
  put_kv(h, "seed", std::to_string(snap.seed));
  put_kv(h, "mesh_hash", hash_to_hex(snap.mesh_hash));
  put_kv(h, "config_hash", hash_to_hex(config_hash));
  put_kv(h, "sample_indices", join_ints(snap.sample_indices));
  put_kv(h, "failed_indices", join_ints(snap.failed_indices));
  std::vector<double> blob;
  blob.reserve(static_cast<std::size_t>(snap.U.size() + snap.strains.size()));
  append_matrix(blob, snap.U);
  append_matrix(blob, snap.strains);
  write_artifact(path, "snapshots", h, blob);
}

SnapshotMatrix read_snapshots(const std::string& path) {
  const Artifact a = read_artifact(path, "snapshots");
  SnapshotMatrix snap;
  const Eigen::Index rows = a.get_long("rows");
  const Eigen::Index cols = a.get_long("cols");
  snap.L = a.get_double("L");
  snap.magnitude = a.get_double("magnitude");
  snap.seed = a.get_u64("seed");
  snap.mesh_hash = hex_to_hash(a.get("mesh_hash"));
  snap.sample_indices = a.get_ints("sample_indices");
  snap.failed_indices = a.get_ints("failed_indices");
  std::size_t pos = 0;
  snap.U = take_matrix(a.blob, pos, rows, cols);
  snap.strains = take_matrix(a.blob, pos, cols, 3);
  return snap;
}

void write_pod_basis(const std::string& path, const PodBasis& basis,
                     std::uint64_t config_hash) {
  std::string h;
  put_kv(h, "n_dofs", std::to_string(basis.n_dofs()));
  put_kv(h, "p", std::to_string(basis.p()));
  put_kv(h, "n_singular", std::to_string(basis.singular_values.size()));
  put_kv(h, "mesh_hash", hash_to_hex(basis.mesh_hash));
  put_kv(h, "config_hash", hash_to_hex(config_hash));
  put_kv(h, "content_hash", hash_to_hex(basis.content_hash()));
  std::vector<double> blob;
  for (Eigen::Index i = 0; i < basis.phi0.size(); ++i)
    blob.push_back(basis.phi0[i]);
  append_matrix(blob, basis.modes);
  for (Eigen::Index i = 0; i < basis.singular_values.size(); ++i)
    blob.push_back(basis.singular_values[i]);
  write_artifact(path, "pod", h, blob);
}

PodBasis read_pod_basis(const std::string& path) {
  const Artifact a = read_artifact(path, "pod");
  PodBasis basis;
  const Eigen::Index n = a.get_long("n_dofs");
  const Eigen::Index p = a.get_long("p");
  const Eigen::Index ns = a.get_long("n_singular");
  basis.mesh_hash = hex_to_hash(a.get("mesh_hash"));
  std::size_t pos = 0;
  basis.phi0 = take_vector(a.blob, pos, n);
  basis.modes = take_matrix(a.blob, pos, n, p);
  basis.singular_values = take_vector(a.blob, pos, ns);
  const std::uint64_t want = hex_to_hash(a.get("content_hash"));
  if (basis.content_hash() != want)
    throw std::runtime_error("'" + path + "' content hash mismatch");
  return basis;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt,
                      std::uint64_t config_hash) {
  const BranchNet& net = ckpt.net;
  const TrainConfig& cfg = ckpt.config;
  std::string h;
  put_kv(h, "format_version", std::to_string(ckpt.format_version));
  put_kv(h, "config_hash", hash_to_hex(config_hash));
  put_kv(h, "widths", join_ints(net.widths()));
  put_kv(h, "epochs_recorded",
         std::to_string(ckpt.history.train_mse.size()));
  put_kv(h, "best_epoch", std::to_string(ckpt.best_epoch));
  put_kv(h, "best_val_mse", format_double(ckpt.best_val_mse));
  put_kv(h, "final_train_mse", format_double(ckpt.final_train_mse));
  put_kv(h, "final_val_mse", format_double(ckpt.final_val_mse));
  put_kv(h, "pod_hash", hash_to_hex(ckpt.pod_hash));
  put_kv(h, "lr0", format_double(cfg.lr0));
  put_kv(h, "decay_step", format_double(cfg.decay_step));
  put_kv(h, "decay_rate", format_double(cfg.decay_rate));
  put_kv(h, "batches_per_epoch", std::to_string(cfg.batches_per_epoch));
  put_kv(h, "epochs", std::to_string(cfg.epochs));
  put_kv(h, "validation_fraction", format_double(cfg.validation_fraction));
  put_kv(h, "seed", std::to_string(cfg.seed));
  put_kv(h, "beta1", format_double(cfg.beta1));
  put_kv(h, "beta2", format_double(cfg.beta2));
  put_kv(h, "adam_eps", format_double(cfg.adam_eps));

  std::vector<double> blob;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    append_matrix(blob, net.weights[l]);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      blob.push_back(net.biases[l][i]);
  }
  for (int i = 0; i < 3; ++i) blob.push_back(net.in_mean[i]);
  for (int i = 0; i < 3; ++i) blob.push_back(net.in_scale[i]);
  for (Eigen::Index i = 0; i < net.out_mean.size(); ++i)
    blob.push_back(net.out_mean[i]);
  for (Eigen::Index i = 0; i < net.out_scale.size(); ++i)
    blob.push_back(net.out_scale[i]);
  for (double v : ckpt.history.train_mse) blob.push_back(v);
  for (double v : ckpt.history.val_mse) blob.push_back(v);
  for (double v : ckpt.history.val_mse_raw) blob.push_back(v);
  for (double v : ckpt.history.lr) blob.push_back(v);
  write_artifact(path, "checkpoint", h, blob);
}

Checkpoint read_checkpoint(const std::string& path) {
  const Artifact a = read_artifact(path, "checkpoint");
  Checkpoint ckpt;
  ckpt.format_version = static_cast<int>(a.get_long("format_version"));
  if (ckpt.format_version != 1)
    throw std::runtime_error("'" + path + "': unsupported checkpoint version");
  const std::vector<int> widths = a.get_ints("widths");
  if (widths.size() < 2)
    throw std::runtime_error("'" + path + "': malformed widths");
  const Eigen::Index epochs_recorded = a.get_long("epochs_recorded");
  ckpt.best_epoch = static_cast<int>(a.get_long("best_epoch"));
  ckpt.best_val_mse = a.get_double("best_val_mse");
  ckpt.final_train_mse = a.get_double("final_train_mse");
  ckpt.final_val_mse = a.get_double("final_val_mse");
  ckpt.pod_hash = hex_to_hash(a.get("pod_hash"));
  ckpt.config.lr0 = a.get_double("lr0");
  ckpt.config.decay_step = a.get_double("decay_step");
  ckpt.config.decay_rate = a.get_double("decay_rate");
  ckpt.config.batches_per_epoch =
      static_cast<int>(a.get_long("batches_per_epoch"));
  ckpt.config.epochs = static_cast<int>(a.get_long("epochs"));
  ckpt.config.validation_fraction = a.get_double("validation_fraction");
  ckpt.config.seed = a.get_u64("seed");
  ckpt.config.beta1 = a.get_double("beta1");
  ckpt.config.beta2 = a.get_double("beta2");
  ckpt.config.adam_eps = a.get_double("adam_eps");

  std::size_t pos = 0;
  BranchNet& net = ckpt.net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Eigen::Index rows = widths[l + 1];
    const Eigen::Index cols = widths[l];
    net.weights.push_back(take_matrix(a.blob, pos, rows, cols));
    net.biases.push_back(take_vector(a.blob, pos, rows));
  }
  net.in_mean = take_vector(a.blob, pos, 3);
  net.in_scale = take_vector(a.blob, pos, 3);
  const Eigen::Index p = widths.back();
  net.out_mean = take_vector(a.blob, pos, p);
  net.out_scale = take_vector(a.blob, pos, p);
  auto take_list = [&](std::vector<double>& dst) {
    dst.resize(static_cast<std::size_t>(epochs_recorded));
    for (auto& v : dst) v = a.blob.at(pos++);
  };
  take_list(ckpt.history.train_mse);
  take_list(ckpt.history.val_mse);
  take_list(ckpt.history.val_mse_raw);
  take_list(ckpt.history.lr);
  net.validate();
  return ckpt;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::string& path,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_escape(row[i]);
    }
    os << "\r\n";
  }
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

void write_samples_csv(const std::string& path, const SampleSet& set) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"index", "eps_xx", "eps_yy", "gamma_xy"});
  for (int i = 0; i < set.size(); ++i) {
    rows.push_back({std::to_string(i), format_double(set.samples(i, 0)),
                    format_double(set.samples(i, 1)),
                    format_double(set.samples(i, 2))});
  }
  write_csv(path, rows);
}

Eigen::MatrixXd read_samples_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::vector<Eigen::Vector3d> rows;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {  // "index,eps_xx,..."
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4)
      throw std::runtime_error("'" + path + "': malformed sample row");
    rows.emplace_back(parse_double(cells[1]), parse_double(cells[2]),
                      parse_double(cells[3]));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

void write_loss_history_csv(const std::string& path, const TrainHistory& h) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"epoch", "train_mse", "val_mse", "val_mse_raw", "lr"});
  for (std::size_t e = 0; e < h.train_mse.size(); ++e) {
    rows.push_back({std::to_string(e), format_double(h.train_mse[e]),
                    format_double(h.val_mse[e]),
                    format_double(h.val_mse_raw[e]), format_double(h.lr[e])});
  }
  write_csv(path, rows);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_vtk(const std::string& path, const Eigen::MatrixX2d& nodes,
               const Eigen::MatrixX4i& elements, const VtkFields& fields) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  const Eigen::Index nn = nodes.rows();
  const Eigen::Index ne = elements.rows();
  os << "# vtk DataFile Version 3.0\n";
  os << "hyperfe fields\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (Eigen::Index i = 0; i < nn; ++i)
    os << format_double(nodes(i, 0)) << ' ' << format_double(nodes(i, 1))
       << " 0\n";
  os << "CELLS " << ne << ' ' << 5 * ne << '\n';
  for (Eigen::Index e = 0; e < ne; ++e)
    os << "4 " << elements(e, 0) << ' ' << elements(e, 1) << ' '
       << elements(e, 2) << ' ' << elements(e, 3) << '\n';
  os << "CELL_TYPES " << ne << '\n';
  for (Eigen::Index e = 0; e < ne; ++e) os << "9\n";

  if (!fields.point_vectors.empty() || !fields.point_scalars.empty()) {
    os << "POINT_DATA " << nn << '\n';
    for (const auto& [name, v] : fields.point_vectors) {
      if (v.rows() != nn)
        throw std::invalid_argument("write_vtk: point vector size mismatch");
      os << "VECTORS " << name << " double\n";
      for (Eigen::Index i = 0; i < nn; ++i)
        os << format_double(v(i, 0)) << ' ' << format_double(v(i, 1))
           << " 0\n";
    }
    for (const auto& [name, v] : fields.point_scalars) {
      if (v.size() != nn)
        throw std::invalid_argument("write_vtk: point scalar size mismatch");
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < nn; ++i) os << format_double(v[i]) << '\n';
    }
  }
  if (!fields.cell_scalars.empty()) {
    os << "CELL_DATA " << ne << '\n';
    for (const auto& [name, v] : fields.cell_scalars) {
      if (v.size() != ne)
        throw std::invalid_argument("write_vtk: cell scalar size mismatch");
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < ne; ++i) os << format_double(v[i]) << '\n';
    }
  }
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hyperfe
