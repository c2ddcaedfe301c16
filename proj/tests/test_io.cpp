#include "hyperfe/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hyperfe/hash.hpp"
#include "hyperfe/rng.hpp"

namespace hyperfe {
namespace {

struct IoFixture : ::testing::Test {
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("hyperfe_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  std::filesystem::path dir;
};

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1e-300, -3.5e17,
                   0.30000000000000004, 6.02e23}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.1), "0.1");  // shortest form, not 0.1000000...
}

TEST(HashHex, RoundTripAndValidation) {
  const std::uint64_t cases[] = {0, 1, 0xdeadbeefcafef00dULL, UINT64_MAX};
  for (std::uint64_t h : cases) {
    const std::string s = hash_to_hex(h);
    EXPECT_EQ(s.size(), 16u);
    EXPECT_EQ(hex_to_hash(s), h);
  }
  EXPECT_THROW(hex_to_hash("xyz"), std::invalid_argument);
  EXPECT_THROW(hex_to_hash(""), std::invalid_argument);
  EXPECT_THROW(hex_to_hash("00112233445566zz"), std::invalid_argument);
}

TEST(CsvEscape, Rfc4180Cases) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape(""), "");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("line\nbreak"), "\"line\nbreak\"");
}

TEST_F(IoFixture, CsvRowsEndInCrlf) {
  write_csv(at("t.csv"), {{"a", "b,c"}, {"1", "2"}});
  const std::string text = read_text(at("t.csv"));
  EXPECT_EQ(text, "a,\"b,c\"\r\n1,2\r\n");
}

TEST_F(IoFixture, SnapshotRoundTripIsBitExact) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const SampleSet set = lhs_sample(6, 0.04, 3);
  SnapshotMatrix snap = generate_snapshots(mesh, set, MaterialParams{});
  snap.failed_indices.push_back(17);  // exercise the failed list too

  write_snapshots(at("snap.bin"), snap, 0xabcdef);
  const SnapshotMatrix back = read_snapshots(at("snap.bin"));

  EXPECT_TRUE((back.U.array() == snap.U.array()).all());
  EXPECT_TRUE((back.strains.array() == snap.strains.array()).all());
  EXPECT_EQ(back.sample_indices, snap.sample_indices);
  EXPECT_EQ(back.failed_indices, snap.failed_indices);
  EXPECT_DOUBLE_EQ(back.L, snap.L);
  EXPECT_DOUBLE_EQ(back.magnitude, snap.magnitude);
  EXPECT_EQ(back.seed, snap.seed);
  EXPECT_EQ(back.mesh_hash, snap.mesh_hash);
}

TEST_F(IoFixture, PodRoundTripIsBitExact) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const SnapshotMatrix snap =
      generate_snapshots(mesh, lhs_sample(8, 0.04, 5), MaterialParams{});
  const PodBasis basis = compute_pod(snap, 4);

  write_pod_basis(at("pod.bin"), basis);
  const PodBasis back = read_pod_basis(at("pod.bin"));
  EXPECT_TRUE((back.phi0.array() == basis.phi0.array()).all());
  EXPECT_TRUE((back.modes.array() == basis.modes.array()).all());
  EXPECT_TRUE(
      (back.singular_values.array() == basis.singular_values.array()).all());
  EXPECT_EQ(back.mesh_hash, basis.mesh_hash);
  EXPECT_EQ(back.content_hash(), basis.content_hash());
  EXPECT_FALSE(back.has_gradients());  // gradients are recomputed, not stored
}

TEST_F(IoFixture, PodReaderDetectsCorruption) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const SnapshotMatrix snap =
      generate_snapshots(mesh, lhs_sample(8, 0.04, 5), MaterialParams{});
  const PodBasis basis = compute_pod(snap, 4);
  write_pod_basis(at("pod.bin"), basis);

  // Flip one byte in the blob section.
  std::fstream f(at("pod.bin"),
                 std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(-9, std::ios::end);
  char c;
  f.seekg(-9, std::ios::end);
  f.get(c);
  f.seekp(-9, std::ios::end);
  c = static_cast<char>(c ^ 0x40);
  f.put(c);
  f.close();

  EXPECT_THROW(read_pod_basis(at("pod.bin")), std::runtime_error);
}

TEST_F(IoFixture, CheckpointRoundTripReproducesForwardBitExact) {
  Rng rng(41);
  Eigen::MatrixXd x(10, 3), y(10, 4);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = uniform_range(rng, -0.04, 0.04);
    for (int j = 0; j < 4; ++j) y(i, j) = uniform_range(rng, -1.0, 1.0);
  }
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 4;
  const Checkpoint ckpt = train(BranchNet::create(4, 8, 2, 9), x, y, cfg);

  write_checkpoint(at("ckpt.bin"), ckpt, 0x1234);
  const Checkpoint back = read_checkpoint(at("ckpt.bin"));

  EXPECT_EQ(back.format_version, ckpt.format_version);
  EXPECT_EQ(back.best_epoch, ckpt.best_epoch);
  EXPECT_EQ(back.pod_hash, ckpt.pod_hash);
  EXPECT_DOUBLE_EQ(back.best_val_mse, ckpt.best_val_mse);
  EXPECT_DOUBLE_EQ(back.final_train_mse, ckpt.final_train_mse);
  EXPECT_EQ(back.config.epochs, cfg.epochs);
  EXPECT_DOUBLE_EQ(back.config.lr0, cfg.lr0);
  EXPECT_EQ(back.config.seed, cfg.seed);
  ASSERT_EQ(back.history.train_mse.size(), ckpt.history.train_mse.size());
  for (std::size_t e = 0; e < ckpt.history.train_mse.size(); ++e) {
    EXPECT_EQ(back.history.train_mse[e], ckpt.history.train_mse[e]);
    EXPECT_EQ(back.history.val_mse[e], ckpt.history.val_mse[e]);
    EXPECT_EQ(back.history.val_mse_raw[e], ckpt.history.val_mse_raw[e]);
    EXPECT_EQ(back.history.lr[e], ckpt.history.lr[e]);
  }

  // Forward evaluations agree bit for bit.
  for (int i = 0; i < 10; ++i) {
    const Strain2D eps{x(i, 0), x(i, 1), x(i, 2)};
    const Eigen::VectorXd a = branch_forward(ckpt.net, eps);
    const Eigen::VectorXd b = branch_forward(back.net, eps);
    EXPECT_TRUE((a.array() == b.array()).all());
  }
}

TEST_F(IoFixture, SamplesCsvRoundTrip) {
  const SampleSet set = lhs_sample(9, 0.04, 77);
  write_samples_csv(at("samples.csv"), set);
  const Eigen::MatrixXd back = read_samples_csv(at("samples.csv"));
  ASSERT_EQ(back.rows(), 9);
  ASSERT_EQ(back.cols(), 3);
  // Shortest round-trip formatting preserves every double exactly.
  EXPECT_TRUE((back.array() == set.samples.array()).all());

  const std::string text = read_text(at("samples.csv"));
  EXPECT_EQ(text.rfind("index,eps_xx,eps_yy,gamma_xy\r\n", 0), 0u);
}

TEST_F(IoFixture, LossHistoryCsvHasOneRowPerEpoch) {
  TrainHistory h;
  h.train_mse = {1.0, 0.5};
  h.val_mse = {1.1, 0.6};
  h.val_mse_raw = {2.2, 1.2};
  h.lr = {1e-3, 9e-4};
  write_loss_history_csv(at("loss.csv"), h);
  const std::string text = read_text(at("loss.csv"));
  EXPECT_EQ(text, "epoch,train_mse,val_mse,val_mse_raw,lr\r\n"
                  "0,1,1.1,2.2,0.001\r\n"
                  "1,0.5,0.6,1.2,9e-04\r\n");
}

TEST_F(IoFixture, VtkSmoke) {
  Eigen::MatrixX2d nodes(4, 2);
  nodes << 0, 0, 1, 0, 1, 1, 0, 1;
  Eigen::MatrixX4i elements(1, 4);
  elements << 0, 1, 2, 3;
  VtkFields fields;
  Eigen::MatrixX2d disp(4, 2);
  disp.setConstant(0.25);
  fields.point_vectors.emplace_back("displacement", disp);
  Eigen::VectorXd cell(1);
  cell << 3.0;
  fields.cell_scalars.emplace_back("sigma_xx", cell);

  write_vtk(at("out.vtk"), nodes, elements, fields);
  const std::string text = read_text(at("out.vtk"));
  EXPECT_NE(text.find("# vtk DataFile"), std::string::npos);
  EXPECT_NE(text.find("POINTS 4 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 1"), std::string::npos);
  EXPECT_NE(text.find("VECTORS displacement double"), std::string::npos);
  EXPECT_NE(text.find("CELL_DATA 1"), std::string::npos);
  EXPECT_NE(text.find("sigma_xx"), std::string::npos);
}

TEST_F(IoFixture, MissingFileThrows) {
  EXPECT_THROW(read_snapshots(at("nope.bin")), std::runtime_error);
  EXPECT_THROW(read_pod_basis(at("nope.bin")), std::runtime_error);
  EXPECT_THROW(read_checkpoint(at("nope.bin")), std::runtime_error);
  EXPECT_THROW(read_text(at("nope.txt")), std::runtime_error);
}

TEST_F(IoFixture, WrongKindIsRejected) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const SnapshotMatrix snap =
      generate_snapshots(mesh, lhs_sample(6, 0.04, 2), MaterialParams{});
  write_snapshots(at("snap.bin"), snap);
  EXPECT_THROW(read_pod_basis(at("snap.bin")), std::runtime_error);
  EXPECT_THROW(read_checkpoint(at("snap.bin")), std::runtime_error);
}

}  // namespace
}  // namespace hyperfe
