#ifndef HYPERFE_IO_HPP
#define HYPERFE_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/micro_solver.hpp"
#include "hyperfe/pod.hpp"
#include "hyperfe/sampling.hpp"
#include "hyperfe/training.hpp"

// Artifact files: an ASCII header of "key value" lines opening with
// "hyperfe <kind> v1" and closing with "blob <count>", followed by that many
// raw little-endian float64 values. Headers carry the provenance hashes so
// every downstream stage can detect stale inputs.

namespace hyperfe {

// config_hash stamps the generating run configuration into the header for
// provenance audits; readers do not interpret it.
void write_snapshots(const std::string& path, const SnapshotMatrix& snap,
                     std::uint64_t config_hash = 0);
SnapshotMatrix read_snapshots(const std::string& path);

// Gradients are not stored; recompute with mode_gradients on the mesh whose
// hash the file records.
void write_pod_basis(const std::string& path, const PodBasis& basis,
                     std::uint64_t config_hash = 0);
PodBasis read_pod_basis(const std::string& path);

void write_checkpoint(const std::string& path, const Checkpoint& ckpt,
                      std::uint64_t config_hash = 0);
Checkpoint read_checkpoint(const std::string& path);

// RFC 4180: fields holding commas, quotes or line breaks are quoted with
// embedded quotes doubled; records end in CRLF.
std::string csv_escape(const std::string& field);
void write_csv(const std::string& path,
               const std::vector<std::vector<std::string>>& rows);

// Shortest round-trip decimal form of a double, locale-independent.
std::string format_double(double v);

void write_samples_csv(const std::string& path, const SampleSet& set);
// Returns the strain rows only; generation metadata lives in the snapshot
// artifact.
Eigen::MatrixXd read_samples_csv(const std::string& path);

void write_loss_history_csv(const std::string& path, const TrainHistory& h);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Legacy-ASCII unstructured grid of bilinear quads: point vector/scalar
// data, cell scalar data.
struct VtkFields {
  std::vector<std::pair<std::string, Eigen::MatrixX2d>> point_vectors;
  std::vector<std::pair<std::string, Eigen::VectorXd>> point_scalars;
  std::vector<std::pair<std::string, Eigen::VectorXd>> cell_scalars;
};
void write_vtk(const std::string& path, const Eigen::MatrixX2d& nodes,
               const Eigen::MatrixX4i& elements, const VtkFields& fields);

}  // namespace hyperfe

#endif
