#include "hyperfe/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "hyperfe/hash.hpp"
#include "hyperfe/io.hpp"

namespace hyperfe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a # comment that is not inside a double-quoted value.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" +
                                v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw std::invalid_argument("config: '" + key + "' expects an integer");
  return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: '" + key +
                                "' expects a non-negative integer");
  return out;
}

void apply(RunConfig& c, const std::string& section, const std::string& key,
           const std::string& raw) {
  const std::string full = section.empty() ? key : section + "." + key;
  const std::string v = unquote(raw);
  if (section == "rve") {
    if (key == "n_per_side") c.rve.n_per_side = to_int(full, v);
    else if (key == "L") c.rve.L = to_double(full, v);
    else if (key == "fiber_fraction") c.rve.fiber_fraction = to_double(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "materials") {
    if (key == "K_f") c.materials.K_f = to_double(full, v);
    else if (key == "G_f") c.materials.G_f = to_double(full, v);
    else if (key == "K_m") c.materials.K_m = to_double(full, v);
    else if (key == "alpha_1") c.materials.alpha_1 = to_double(full, v);
    else if (key == "alpha_2") c.materials.alpha_2 = to_double(full, v);
    else if (key == "dev_factor") c.materials.dev_factor = to_double(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "sampling") {
    if (key == "n") c.sampling.n = to_int(full, v);
    else if (key == "magnitude") c.sampling.magnitude = to_double(full, v);
    else if (key == "seed") c.sampling.seed = to_u64(full, v);
    else if (key == "threads") c.sampling.threads = to_int(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "pod") {
    if (key == "p") c.pod.p = to_int(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "training") {
    if (key == "lr0") c.training.lr0 = to_double(full, v);
    else if (key == "decay_step") c.training.decay_step = to_double(full, v);
    else if (key == "decay_rate") c.training.decay_rate = to_double(full, v);
    else if (key == "batches_per_epoch")
      c.training.batches_per_epoch = to_int(full, v);
    else if (key == "epochs") c.training.epochs = to_int(full, v);
    else if (key == "validation_fraction")
      c.training.validation_fraction = to_double(full, v);
    else if (key == "seed") c.training.seed = to_u64(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "macro") {
    if (key == "case") c.macro.case_name = v;
    else if (key == "resolution") c.macro.resolution = to_int(full, v);
    else if (key == "load") c.macro.load = to_double(full, v);
    else if (key == "steps") c.macro.steps = to_int(full, v);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "paths") {
    if (key == "workdir") c.paths.workdir = v;
    else if (key == "snapshots") c.paths.snapshots = v;
    else if (key == "pod_basis") c.paths.pod_basis = v;
    else if (key == "checkpoint") c.paths.checkpoint = v;
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else {
    throw std::invalid_argument("config: unknown section '" + section + "'");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    apply(c, section, key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (!path.empty()) c = parse_config_text(read_text(path));
  if (const char* env = std::getenv("HYPERFE_WORKDIR"); env && *env)
    c.paths.workdir = env;
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (rve.n_per_side < 8)
    throw std::invalid_argument("config: rve.n_per_side must be >= 8");
  if (!(rve.L > 0.0)) throw std::invalid_argument("config: rve.L must be > 0");
  if (!(rve.fiber_fraction > 0.0) ||
      !(rve.fiber_fraction < 3.14159265358979323846 / 4.0))
    throw std::invalid_argument(
        "config: rve.fiber_fraction must lie in (0, pi/4)");
  materials.validate();
  if (sampling.n < 1) throw std::invalid_argument("config: sampling.n >= 1");
  if (!(sampling.magnitude > 0.0))
    throw std::invalid_argument("config: sampling.magnitude must be > 0");
  if (sampling.threads < 1)
    throw std::invalid_argument("config: sampling.threads >= 1");
  if (pod.p < 1) throw std::invalid_argument("config: pod.p >= 1");
  training.validate();
  if (macro.case_name != "cooks_membrane" && macro.case_name != "l_profile" &&
      macro.case_name != "both")
    throw std::invalid_argument("config: macro.case must be cooks_membrane, "
                                "l_profile or both");
  if (macro.resolution < 0)
    throw std::invalid_argument("config: macro.resolution >= 0");
  if (macro.steps < 1) throw std::invalid_argument("config: macro.steps >= 1");
  if (paths.workdir.empty())
    throw std::invalid_argument("config: paths.workdir must not be empty");
}

std::string RunConfig::canonical_text() const {
  std::string s;
  const auto kv = [&s](const char* key, const std::string& v) {
    s += key;
    s += " = ";
    s += v;
    s += '\n';
  };
  kv("rve.n_per_side", std::to_string(rve.n_per_side));
  kv("rve.L", format_double(rve.L));
  kv("rve.fiber_fraction", format_double(rve.fiber_fraction));
  kv("materials.K_f", format_double(materials.K_f));
  kv("materials.G_f", format_double(materials.G_f));
  kv("materials.K_m", format_double(materials.K_m));
  kv("materials.alpha_1", format_double(materials.alpha_1));
  kv("materials.alpha_2", format_double(materials.alpha_2));
  kv("materials.dev_factor", format_double(materials.dev_factor));
  kv("sampling.n", std::to_string(sampling.n));
  kv("sampling.magnitude", format_double(sampling.magnitude));
  kv("sampling.seed", std::to_string(sampling.seed));
  kv("pod.p", std::to_string(pod.p));
  kv("training.lr0", format_double(training.lr0));
  kv("training.decay_step", format_double(training.decay_step));
  kv("training.decay_rate", format_double(training.decay_rate));
  kv("training.batches_per_epoch", std::to_string(training.batches_per_epoch));
  kv("training.epochs", std::to_string(training.epochs));
  kv("training.validation_fraction",
     format_double(training.validation_fraction));
  kv("training.seed", std::to_string(training.seed));
  kv("macro.case", macro.case_name);
  kv("macro.resolution", std::to_string(macro.resolution));
  kv("macro.load", format_double(macro.load));
  kv("macro.steps", std::to_string(macro.steps));
  return s;
}

std::uint64_t RunConfig::content_hash() const {
  Fnv1a h;
  h.add(canonical_text());
  return h.value();
}

std::string RunConfig::snapshots_path() const {
  if (!paths.snapshots.empty()) return paths.snapshots;
  return paths.workdir + "/snapshots/snapshots.bin";
}

std::string RunConfig::pod_path() const {
  if (!paths.pod_basis.empty()) return paths.pod_basis;
  return paths.workdir + "/pod/basis.bin";
}

std::string RunConfig::checkpoint_path() const {
  if (!paths.checkpoint.empty()) return paths.checkpoint;
  return paths.workdir + "/checkpoints/branch.bin";
}

std::string RunConfig::results_dir() const { return paths.workdir + "/results"; }

}  // namespace hyperfe
