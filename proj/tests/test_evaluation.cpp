#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "oracles.hpp"
#include "phrelu/data.hpp"
#include "phrelu/evaluation.hpp"

using namespace phrelu;

namespace {

constexpr double kZ975 = 1.959963984540054;

Particle constant_particle(double w0, double s2, double log_weight = 0.0) {
  return {ModelParams{HyperplaneSet(1, 1.0), (Vector(1) << w0).finished(), s2}, log_weight};
}

ParticleEnsemble random_ensemble(std::size_t L, std::uint64_t seed) {
  auto rng = derive_stream(seed, {});
  Hyperparams h;
  h.n_planes = 2;
  std::uniform_real_distribution<double> u(-2.0, 0.0);
  ParticleEnsemble ens;
  for (std::size_t t = 0; t < L; ++t) ens.particles.push_back({sample_prior(h, 2, rng), u(rng)});
  return ens;
}

}  // namespace

TEST(Predictive, SingleParticleIsGaussian) {
  ParticleEnsemble ens;
  ens.particles.push_back(constant_particle(0.0, 1.0));
  const auto s = posterior_predictive(ens, Matrix::Zero(1, 1), 0.95);
  EXPECT_NEAR(s[0].mean, 0.0, 1e-12);
  EXPECT_NEAR(s[0].lower, -kZ975, 1e-6);
  EXPECT_NEAR(s[0].upper, kZ975, 1e-6);
  EXPECT_EQ(s[0].level, 0.95);
}

TEST(Predictive, DuplicatedParticleChangesNothing) {
  ParticleEnsemble one, two;
  one.particles.push_back(constant_particle(0.5, 0.04));
  two.particles.push_back(constant_particle(0.5, 0.04));
  two.particles.push_back(constant_particle(0.5, 0.04));
  const auto a = posterior_predictive(one, Matrix::Zero(1, 1), 0.9)[0];
  const auto b = posterior_predictive(two, Matrix::Zero(1, 1), 0.9)[0];
  EXPECT_NEAR(a.lower, b.lower, 1e-9);
  EXPECT_NEAR(a.upper, b.upper, 1e-9);
}

TEST(Predictive, EndpointsHitTheMixtureQuantiles) {
  const auto ens = random_ensemble(25, 1);
  const Matrix X = Matrix::Random(10, 2) * 0.6;
  const auto s = posterior_predictive(ens, X, 0.95);
  const auto w = ens.normalized_weights();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    // Mixture CDF written out from the definition.
    auto cdf = [&](double q) {
      double c = 0.0;
      for (std::size_t t = 0; t < ens.size(); ++t) {
        const auto& th = ens.particles[t].params;
        const double m = predict(th, X.row(i))[0];
        c += w[t] * 0.5 * std::erfc(-(q - m) / std::sqrt(2.0 * th.sigma_sq));
      }
      return c;
    };
    EXPECT_NEAR(cdf(s[static_cast<std::size_t>(i)].lower), 0.025, 1e-6);
    EXPECT_NEAR(cdf(s[static_cast<std::size_t>(i)].upper), 0.975, 1e-6);
    double mean = 0.0;
    for (std::size_t t = 0; t < ens.size(); ++t) mean += w[t] * predict(ens.particles[t].params, X.row(i))[0];
    EXPECT_NEAR(s[static_cast<std::size_t>(i)].mean, mean, 1e-12);
  }
}

TEST(Predictive, IntervalsNestByLevel) {
  const auto ens = random_ensemble(20, 2);
  const Matrix X = Matrix::Random(5, 2) * 0.6;
  const auto a = posterior_predictive(ens, X, 0.5);
  const auto b = posterior_predictive(ens, X, 0.9);
  const auto c = posterior_predictive(ens, X, 0.95);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(b[i].lower, a[i].lower);
    EXPECT_GE(b[i].upper, a[i].upper);
    EXPECT_LE(c[i].lower, b[i].lower);
    EXPECT_GE(c[i].upper, b[i].upper);
  }
}

TEST(Predictive, SplittingAParticleKeepsTheMean) {
  auto ens = random_ensemble(10, 3);
  const Matrix X = Matrix::Random(4, 2) * 0.5;
  const Vector before = ens.predict_mean(X);
  auto copy = ens.particles[3];
  ens.particles[3].log_weight -= std::log(2.0);
  copy.log_weight = ens.particles[3].log_weight;
  ens.particles.push_back(copy);
  const Vector after = ens.predict_mean(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) EXPECT_NEAR(after[i], before[i], 1e-12);
}

TEST(Predictive, RejectsBadLevelAndEmptyEnsemble) {
  const auto ens = random_ensemble(3, 4);
  EXPECT_THROW(posterior_predictive(ens, Matrix::Zero(1, 2), 1.0), InvalidParameter);
  EXPECT_THROW(posterior_predictive(ens, Matrix::Zero(1, 2), 0.0), InvalidParameter);
  EXPECT_THROW(posterior_predictive(ParticleEnsemble{}, Matrix::Zero(1, 2), 0.95), DegenerateEnsemble);
}

TEST(Rmse, Examples) {
  const Vector y = (Vector(2) << 1.0, 2.0).finished();
  EXPECT_EQ(rmse(y, y), 0.0);
  EXPECT_DOUBLE_EQ(rmse((Vector(2) << 4.0, 6.0).finished(), y), std::sqrt(12.5));
}

TEST(Rmse, PermutationAndScale) {
  const Vector a = Vector::Random(30);
  const Vector b = Vector::Random(30);
  EXPECT_NEAR(rmse(a.reverse().eval(), b.reverse().eval()), rmse(a, b), 1e-14);
  EXPECT_NEAR(rmse((-3.0 * a).eval(), (-3.0 * b).eval()), 3.0 * rmse(a, b), 1e-12);
}

TEST(Rmse, NoiseFloorOnSimulatedData) {
  auto rng = derive_stream(5, {});
  const auto sim = gen_simulation(2, 2, 5000, 0.1, rng);
  // RMSE of the truth is the sample noise sd; its sd is about 0.1 / sqrt(2n).
  EXPECT_NEAR(rmse(sim.noiseless, sim.data.y), 0.1, 3.0 * 0.1 / std::sqrt(2.0 * 5000.0));
}

TEST(Rmse, RejectsBadInput) {
  EXPECT_THROW(rmse(Vector::Zero(2), Vector::Zero(3)), ShapeError);
  EXPECT_THROW(rmse(Vector(), Vector()), EmptyDataset);
}

TEST(Coverage, Extremes) {
  const Vector y = (Vector(3) << -1.0, 0.0, 5.0).finished();
  const double big = 1e300;
  std::vector<PredictiveSummary> wide(3, PredictiveSummary{0.0, -big, big, 0.95});
  EXPECT_EQ(coverage(wide, y), 1.0);
  std::vector<PredictiveSummary> wrong(3, PredictiveSummary{10.0, 10.0, 10.0, 0.95});
  EXPECT_EQ(coverage(wrong, y), 0.0);
  std::vector<PredictiveSummary> edge{{0, -1, 0, .95}, {0, 0, 0, .95}, {0, 6, 7, .95}};
  EXPECT_DOUBLE_EQ(coverage(edge, y), 2.0 / 3.0);
  EXPECT_THROW(coverage(wide, Vector::Zero(2)), ShapeError);
}

TEST(CiLength, Examples) {
  std::vector<PredictiveSummary> s(4, PredictiveSummary{0.0, -1.0, 1.0, 0.95});
  EXPECT_EQ(mean_ci_length(s), 2.0);
  ParticleEnsemble ens;
  ens.particles.push_back(constant_particle(0.0, 0.01));
  EXPECT_NEAR(mean_ci_length(posterior_predictive(ens, Matrix::Zero(3, 1), 0.95)), 2.0 * kZ975 * 0.1, 1e-6);
  EXPECT_THROW(mean_ci_length(std::vector<PredictiveSummary>{}), EmptyDataset);
}

TEST(Mixture, QuantileInvertsCdf) {
  GaussianMixture m;
  m.add(0.3, -1.0, 0.2);
  m.add(0.7, 2.0, 1.5);
  for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) EXPECT_NEAR(m.cdf(m.quantile(p)), p, 1e-9);
  EXPECT_NEAR(m.mean(), 0.3 * -1.0 + 0.7 * 2.0, 1e-14);
  EXPECT_THROW(GaussianMixture{}.quantile(0.5), DegenerateEnsemble);
}

TEST(Ols, RecoversALinearFunction) {
  Matrix X = Matrix::Random(50, 3);
  const Vector y = (X * Vector::LinSpaced(3, 1.0, 3.0)).array() + 0.5;
  const Vector c = ols_fit(X, y);
  EXPECT_NEAR(c[0], 0.5, 1e-10);
  EXPECT_NEAR(c[3], 3.0, 1e-10);
  EXPECT_NEAR((ols_predict(c, X) - y).norm(), 0.0, 1e-9);
  EXPECT_THROW(ols_predict(c, Matrix::Zero(2, 2)), ShapeError);
}

TEST(Report, KeyValueLines) {
  Report r;
  r.set("rmse", 0.25);
  r.set("n_test", std::size_t{4});
  r.set("rmse", 0.5);
  EXPECT_EQ(r.str(), "rmse = 0.5\nn_test = 4\n");
}

TEST(PredictionsCsv, EmptyFieldsForMissingIntervals) {
  const auto path = std::filesystem::temp_directory_path() / "phrelu_eval_predictions.csv";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<PredictiveSummary> s{{1.5, nan, nan, 0.95}, {2.0, 1.0, 3.0, 0.95}};
  const Vector y = (Vector(2) << 1.0, 2.0).finished();
  write_predictions_csv(path, s, &y);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "mean,lower,upper,y\n1.5,,,1\n2,1,3,2\n");
  std::filesystem::remove(path);
}
