#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"

using namespace ehmc;
using ehmc::testing::vec;

namespace {

const char* kSingleRegion = R"({
  "n": 2, "d": 1, "J": 1, "m": 1,
  "regions": [{"M": [[1, 0], [0, 1]], "r": [0, 0], "k": 0, "A": [[1], [0]], "y": [0], "L_row": [0]}],
  "hyperplanes": {"F": [[1, 0]], "g": [0]}
})";

nlohmann::json single_doc() { return nlohmann::json::parse(kSingleRegion); }

}  // namespace

TEST(LoadModel, SingleRegionDocument) {
  const auto spec = load_model(kSingleRegion);
  EXPECT_EQ(spec.n, 2);
  EXPECT_EQ(spec.d, 1);
  EXPECT_EQ(spec.num_regions, 1);
  EXPECT_EQ(spec.num_hyperplanes, 1);
  EXPECT_FALSE(spec.mean_flag);
  EXPECT_FALSE(spec.init.has_value());
  EXPECT_EQ(spec.L(0, 0), 0);
  EXPECT_TRUE(spec.M[0].isApprox(Mat::Identity(2, 2)));
}

TEST(LoadModel, WrongShapeOfANamesField) {
  auto doc = single_doc();
  doc["regions"][0]["A"] = {{1, 0}, {0, 1}};
  try {
    load_model(doc.dump());
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("regions[0].A"), std::string::npos) << msg;
    EXPECT_NE(msg.find("dimension mismatch"), std::string::npos) << msg;
  }
}

TEST(LoadModel, MissingFieldIsNamed) {
  auto doc = single_doc();
  doc["hyperplanes"].erase("g");
  try {
    load_model(doc.dump());
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("hyperplanes.g"), std::string::npos) << e.what();
  }
}

TEST(LoadModel, RejectsBadDocuments) {
  EXPECT_THROW(load_model("{not json"), DocumentParseError);
  EXPECT_THROW(load_model("[1, 2]"), ModelError);

  auto doc = single_doc();
  doc["d"] = 2;
  EXPECT_THROW(load_model(doc.dump()), ModelError);  // d must be < n

  doc = single_doc();
  doc["regions"][0]["L_row"] = {2};
  EXPECT_THROW(load_model(doc.dump()), ModelError);  // |L| > J

  doc = single_doc();
  doc["regions"][0]["k"] = "zero";
  EXPECT_THROW(load_model(doc.dump()), ModelError);

  doc = single_doc();
  doc["mean"] = 1;
  EXPECT_THROW(load_model(doc.dump()), ModelError);

  doc = single_doc();
  doc["init"] = {{"region", 2}, {"x", {0, 0}}};
  EXPECT_THROW(load_model(doc.dump()), ModelError);

  EXPECT_THROW(load_model_file("/nonexistent/model.json"), std::ios_base::failure);
}

TEST(LoadModel, SymmetrizesM) {
  auto doc = single_doc();
  doc["regions"][0]["M"] = {{2, 1}, {0, 2}};
  const auto spec = load_model(doc.dump());
  EXPECT_DOUBLE_EQ(spec.M[0](0, 1), 0.5);
  EXPECT_DOUBLE_EQ(spec.M[0](1, 0), 0.5);
}

TEST(LoadModel, RoundTripsThroughJson) {
  const auto spec = ehmc::testing::shipped("pospart.model");
  const auto again = load_model(model_to_json(spec).dump());
  ASSERT_EQ(again.num_regions, spec.num_regions);
  EXPECT_EQ(again.L, spec.L);
  EXPECT_EQ(again.F, spec.F);
  for (int j = 0; j < spec.num_regions; ++j) {
    EXPECT_EQ(again.A[j], spec.A[j]);
    EXPECT_EQ(again.y[j], spec.y[j]);
    EXPECT_EQ(again.r[j], spec.r[j]);
  }
  ASSERT_TRUE(again.init.has_value());
  EXPECT_EQ(again.init->region, spec.init->region);
}

TEST(LoadModel, OneNormModelShape) {
  const auto spec = ehmc::testing::shipped("onenorm.model");
  EXPECT_EQ(spec.num_regions, 8);
  EXPECT_EQ(spec.num_hyperplanes, 3);
  for (int j = 0; j < 8; ++j) {
    EXPECT_EQ(spec.A[j].cwiseAbs(), Mat::Ones(3, 1));
  }
}

TEST(Potential, Examples) {
  auto spec = load_model(kSingleRegion);
  EXPECT_DOUBLE_EQ(potential(spec, 0, vec({3, 4})), 12.5);
  spec.k[0] = 5.0;
  EXPECT_DOUBLE_EQ(potential(spec, 0, vec({0, 0})), 5.0);

  spec.k[0] = 0.0;
  spec.mean_flag = true;
  spec.M[0] = Vec(vec({2, 1})).asDiagonal();
  spec.r[0] = vec({1, 0});
  EXPECT_DOUBLE_EQ(potential(spec, 0, vec({1, 0})), -1.0);
  EXPECT_THROW(potential(spec, 1, vec({0, 0})), std::out_of_range);
}

TEST(Potential, MeanFlagRewriteAgrees) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const Mat M = ehmc::testing::random_spd(rng, n);
    const Vec mu = rng.normal_vector(n);
    auto with_mean = ehmc::testing::gaussian_model(mu, M, Mat::Identity(n, 1), Vec::Zero(1));
    auto with_linear = with_mean;
    with_linear.mean_flag = false;
    with_linear.r[0] = M * mu;
    const Vec x = rng.normal_vector(n);
    const double a = potential(with_mean, 0, x);
    const double b = potential(with_linear, 0, x);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST(Ell, Examples) {
  auto spec = load_model(kSingleRegion);
  spec.y[0] = vec({-1});
  EXPECT_NEAR(ell(spec, 0, vec({1, 7}))[0], 0.0, 0.0);
  spec.y[0] = vec({0});
  EXPECT_DOUBLE_EQ(ell(spec, 0, vec({0.5, 0}))[0], 0.5);

  const auto onenorm = ehmc::testing::shipped("onenorm.model");
  EXPECT_NEAR(ell(onenorm, 0, vec({0.2, 0.3, 0.5}))[0], 0.0, 1e-15);
}

TEST(RegionBoundaries, SignRuleAndWalls) {
  auto spec = load_model(kSingleRegion);
  EXPECT_EQ(region_boundaries(spec, 0).size(), 0);

  // Region 3 of a 3-region model with L row (-2, 0, 3).
  ModelSpec s;
  s.n = 2;
  s.num_regions = 3;
  s.num_hyperplanes = 3;
  s.F = Mat::Zero(3, 2);
  s.F.row(0) << 1, 0;
  s.F.row(1) << 0, 1;
  s.F.row(2) << 1, 1;
  s.g = vec({1, 0, 2});
  s.L = Eigen::MatrixXi::Zero(3, 3);
  s.L.row(2) << -2, 0, 3;
  const auto rb = region_boundaries(s, 2);
  ASSERT_EQ(rb.size(), 2);
  EXPECT_EQ(rb.normals.row(0), Eigen::RowVector2d(-1, 0));
  EXPECT_EQ(rb.offsets[0], -1.0);
  EXPECT_EQ(rb.targets[0], 1);
  EXPECT_EQ(rb.hyperplanes[0], 0);
  EXPECT_EQ(rb.targets[1], 2);  // wall
  EXPECT_EQ(rb.hyperplanes[1], 2);

  const auto onenorm = ehmc::testing::shipped("onenorm.model");
  const auto first = region_boundaries(onenorm, 0);
  ASSERT_EQ(first.size(), 3);
  for (int t : first.targets) EXPECT_NE(t, 0);
}

TEST(RegionMembership, Examples) {
  const auto single = load_model(kSingleRegion);
  EXPECT_EQ(region_membership(single, vec({-5, 3})), std::vector<int>{0});

  const auto onenorm = ehmc::testing::shipped("onenorm.model");
  EXPECT_EQ(region_membership(onenorm, vec({0.2, 0.3, 0.5})), std::vector<int>{0});
  // Octant 2 has bit 0 set: x1 <= 0.
  EXPECT_EQ(region_membership(onenorm, vec({0, 0.5, 0.5}), 1e-12), (std::vector<int>{0, 1}));
}

// Every shipped model: random points in a box classified into region j have
// strictly positive sign-adjusted slacks, and region_membership reports j.
TEST(RegionMembership, PropertySignAdjustment) {
  Rng rng(5);
  for (const char* name : {"onenorm.model", "ntop.model", "pospart.model", "step_line.model"}) {
    const auto spec = ehmc::testing::shipped(name);
    int hits = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      Vec x(spec.n);
      for (int c = 0; c < spec.n; ++c) x[c] = 8.0 * rng.uniform() - 4.0;
      for (int j = 0; j < spec.num_regions; ++j) {
        const auto rb = region_boundaries(spec, j);
        if (rb.size() == 0) continue;
        const Vec slack = rb.normals * x + rb.offsets;
        if (slack.minCoeff() <= 1e-6) continue;
        ++hits;
        const auto members = region_membership(spec, x);
        EXPECT_NE(std::find(members.begin(), members.end(), j), members.end()) << name;
      }
    }
    EXPECT_GT(hits, 100) << name;
  }
}
