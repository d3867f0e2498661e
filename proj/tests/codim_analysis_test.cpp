#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "codimctl/codim_analysis.hpp"
#include "test_support.hpp"

namespace codimctl {
namespace {

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

// Symmetric PSD matrix with prescribed spectrum and random eigenvectors.
Eigen::MatrixXd with_spectrum(std::mt19937_64& rng, const Eigen::VectorXd& eigs) {
  const Eigen::MatrixXd Q = random_orthogonal(rng, static_cast<int>(eigs.size()));
  Eigen::MatrixXd G = Q * eigs.asDiagonal() * Q.transpose();
  return 0.5 * (G + G.transpose());
}

TEST(Spectrum, Examples) {
  const SpectrumReport id = spectrum(Eigen::MatrixXd::Identity(4, 4), 0.5);
  EXPECT_EQ(id.defect_count, 0);
  EXPECT_NEAR(id.optimal_constant(), 1.0, 1e-15);

  const SpectrumReport d = spectrum(Eigen::Vector2d(1, 1e-12).asDiagonal().toDenseMatrix(), 1e-6);
  EXPECT_EQ(d.defect_count, 1);
  EXPECT_NEAR(d.eigs(0), 1.0, 1e-15);
  ASSERT_EQ(d.defect_basis.cols(), 1);
  EXPECT_NEAR(std::abs(d.defect_basis(1, 0)), 1.0, 1e-12);
  EXPECT_THROW(spectrum(Eigen::MatrixXd::Identity(2, 2), 0.0), ValidationError);
}

TEST(Spectrum, HeatDefectsAppearWithTruncation) {
  // tau = 1e-8 times the top eigenvalue of each truncation. Recorded counts: 0, 0, 10.
  std::vector<int> counts;
  for (int N : {16, 32, 64}) {
    const GramianMatrix G = assemble_heat_gramian(N, 0.1, ControlRegion(0.2, 0.8));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.entries, Eigen::EigenvaluesOnly);
    counts.push_back(spectrum(G, 1e-8 * es.eigenvalues().maxCoeff()).defect_count);
  }
  EXPECT_GE(counts[2], 1);
  EXPECT_LE(counts[0], counts[1]);
  EXPECT_LT(counts[1], counts[2]);
}

TEST(ClassifyLadder, Rules) {
  EXPECT_EQ(classify_ladder({8, 16, 32, 64}, {2, 3, 3, 3}).verdict_string(), "FiniteCodim(3)");
  EXPECT_EQ(classify_ladder({8, 16, 32, 64}, {0, 0, 1, 4}).verdict, VerdictKind::NotFiniteCodim);
  EXPECT_EQ(classify_ladder({8, 16, 32, 64}, {0, 0, 4, 4}).verdict, VerdictKind::FiniteCodim);
  EXPECT_EQ(classify_ladder({8, 16, 32, 64}, {0, 5, 2, 3}).verdict, VerdictKind::NotFiniteCodim);
  EXPECT_EQ(classify_ladder({8, 16, 32, 64}, {0, 5, 3, 2}).verdict, VerdictKind::Inconclusive);
  EXPECT_EQ(classify_ladder({8, 16}, {0, 0}).verdict, VerdictKind::Inconclusive);
}

TEST(LadderScan, IdentityWave) {
  const LadderVerdict v = ladder_scan(SystemKind::Wave, 2.0, ControlRegion(0, 1), 0.0, {16, 32, 64});
  EXPECT_EQ(v.verdict_string(), "FiniteCodim(0)");
  for (double m : v.min_eigs) EXPECT_NEAR(m, 1.0, 1e-10);
}

TEST(LadderScan, HeatIsNotFiniteCodim) {
  const LadderVerdict v = ladder_scan(SystemKind::Heat, 0.1, ControlRegion(0.2, 0.8), 0.0, {16, 32, 64, 128});
  EXPECT_EQ(v.verdict, VerdictKind::NotFiniteCodim);
  EXPECT_LT(v.counts[2], v.counts[3]);
  EXPECT_EQ(v.levels.size(), 4u);
  EXPECT_EQ(v.defect_angles.size(), 3u);
}

TEST(LadderScan, WaveWithoutGeometricCondition) {
  const ControlRegion region(0, 0.3);
  EXPECT_GT(region.gcc_time(), 0.2);
  const LadderVerdict v = ladder_scan(SystemKind::Wave, 0.2, region, 0.0, {16, 32, 64, 128});
  EXPECT_EQ(v.verdict, VerdictKind::NotFiniteCodim);
  for (std::size_t j = 1; j < v.counts.size(); ++j) EXPECT_LT(v.counts[j - 1], v.counts[j]);
}

TEST(LadderScan, AbsoluteTauRule) {
  TauRule rule;
  rule.absolute = 0.5;
  const LadderVerdict v = ladder_scan(SystemKind::Wave, 2.0, ControlRegion(0, 1), 0.0, {4, 8, 12}, rule);
  EXPECT_EQ(v.tau, 0.5);
  EXPECT_NE(v.tau_rule.find("absolute"), std::string::npos);
}

TEST(LadderScan, Validation) {
  EXPECT_THROW(ladder_scan(SystemKind::Wave, 2.0, ControlRegion(0, 1), 0.0, {16, 32}), ValidationError);
  EXPECT_THROW(ladder_scan(SystemKind::Wave, 2.0, ControlRegion(0, 1), 0.0, {16, 8, 32}), ValidationError);
  EXPECT_THROW(ladder_scan(SystemKind::Heat, -1.0, ControlRegion(0, 1), 0.0, {4, 8, 16}), ValidationError);
}

TEST(SubspaceTest, Examples) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_TRUE(observability_subspace_test(I, 0, 1.0).holds);
  const Eigen::MatrixXd D = Eigen::Vector2d(1, 1e-12).asDiagonal();
  const SubspaceTestResult fail = observability_subspace_test(D, 0, 10.0);
  EXPECT_FALSE(fail.holds);
  ASSERT_TRUE(fail.witness.has_value());
  EXPECT_NEAR(std::abs((*fail.witness)(1)), 1.0, 1e-12);
  EXPECT_TRUE(observability_subspace_test(D, 1, 10.0).holds);
}

TEST(CompactTest, Examples) {
  EXPECT_TRUE(compact_perturbation_test(Eigen::MatrixXd::Identity(3, 3), 0, 1.0));
  for (int k : {0, 1, 3}) EXPECT_FALSE(compact_perturbation_test(Eigen::MatrixXd::Zero(4, 4), k, 1e6)) << k;
}

TEST(CompactTest, HeatGramianAtSpectralThreshold) {
  const GramianMatrix G = assemble_heat_gramian(64, 0.1, ControlRegion(0.2, 0.8));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.entries, Eigen::EigenvaluesOnly);
  const double tau = 1e-8 * es.eigenvalues().maxCoeff();
  const SpectrumReport s = spectrum(G, tau);
  EXPECT_TRUE(compact_perturbation_test(G.entries, s.defect_count, 1 / std::sqrt(tau)));
  EXPECT_TRUE(observability_subspace_test(G.entries, s.defect_count, 1 / std::sqrt(tau)).holds);
}

// On random spectra the two estimates must imply each other: the subspace estimate with C gives the
// compact one with the derived constant, and the compact one with C gives the subspace one with C.
TEST(Equivalence, RandomSpectra) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int subspace_cases = 0, compact_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const int k = trial % n;
    Eigen::VectorXd eigs(n);
    for (int i = 0; i < n; ++i) eigs(i) = i < k ? 1e-9 * u(rng) : std::pow(10.0, -4 * u(rng));
    const Eigen::MatrixXd G = with_spectrum(rng, eigs);
    const double C = std::pow(10.0, 2.5 * u(rng));
    if (observability_subspace_test(G, k, C).holds) {
      ++subspace_cases;
      EXPECT_TRUE(compact_perturbation_test(G, k, compact_constant_from_subspace(G, k, C))) << trial;
    }
    if (compact_perturbation_test(G, k, C)) {
      ++compact_cases;
      EXPECT_TRUE(observability_subspace_test(G, k, C).holds) << trial;
    }
  }
  EXPECT_GT(subspace_cases, 20);
  EXPECT_GT(compact_cases, 20);
}

TEST(PrincipalAngle, Basics) {
  const Eigen::MatrixXd e1 = Eigen::VectorXd::Unit(3, 0);
  const Eigen::MatrixXd e2 = Eigen::VectorXd::Unit(3, 1);
  EXPECT_NEAR(max_principal_angle(e1, e1), 0.0, 1e-15);
  EXPECT_NEAR(max_principal_angle(e1, e2), std::acos(0.0), 1e-15);
  Eigen::MatrixXd d(3, 1);
  d << 1, 1, 0;
  EXPECT_NEAR(max_principal_angle(e1, d.normalized()), std::acos(0.0) / 2, 1e-15);
}

TEST(EmbedCoordinates, WaveBlocks) {
  Eigen::MatrixXd v(4, 1);
  v << 1, 2, 3, 4;
  const Eigen::MatrixXd w = embed_coordinates(SystemKind::Wave, v, 2, 3);
  Eigen::VectorXd expected(6);
  expected << 1, 2, 0, 3, 4, 0;
  EXPECT_EQ((w.col(0) - expected).norm(), 0.0);
  EXPECT_EQ(embed_coordinates(SystemKind::Heat, v, 4, 5)(4, 0), 0.0);
}

}  // namespace
}  // namespace codimctl
