#ifndef HYPERFE_CONFIG_HPP
#define HYPERFE_CONFIG_HPP

#include <cstdint>
#include <string>

#include "hyperfe/mechanics.hpp"
#include "hyperfe/training.hpp"

namespace hyperfe {

// One structured config governs every pipeline stage. Parsed from a
// TOML-style subset: [section] headers, key = value lines, # comments,
// double-quoted or bare string values.
struct RunConfig {
  struct Rve {
    int n_per_side = 32;
    double L = 1.0;
    double fiber_fraction = 0.55;
  } rve;

  MaterialParams materials;

  struct Sampling {
    int n = 1000;
    double magnitude = 0.04;
    std::uint64_t seed = 42;
    int threads = 1;
  } sampling;

  struct Pod {
    int p = 16;
  } pod;

  TrainConfig training;

  struct Macro {
    std::string case_name = "cooks_membrane";  // key: case
    int resolution = 0;  // 0 selects the per-case benchmark default
    double load = 1.0;   // scales the built-in traction
    int steps = 5;
  } macro;

  struct Paths {
    std::string workdir = "hyperfe_work";
    // Empty entries resolve to the fixed layout under workdir
    // (snapshots/, pod/, checkpoints/, results/).
    std::string snapshots;
    std::string pod_basis;
    std::string checkpoint;
  } paths;

  void validate() const;

  // Deterministic key = value dump of every field; the FNV hash of this text
  // is the config provenance hash stamped into artifacts.
  std::string canonical_text() const;
  std::uint64_t content_hash() const;

  // Resolved artifact locations.
  std::string snapshots_path() const;
  std::string pod_path() const;
  std::string checkpoint_path() const;
  std::string results_dir() const;
};

RunConfig parse_config_text(const std::string& text);

// Reads the file (empty path = all defaults) and applies the
// HYPERFE_WORKDIR environment override.
RunConfig load_config(const std::string& path);

}  // namespace hyperfe

#endif
