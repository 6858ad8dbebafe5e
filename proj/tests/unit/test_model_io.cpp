#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "deeppos/error.hpp"
#include "deeppos/model_io.hpp"
#include "test_util.hpp"

namespace deeppos {
namespace {

SaeModel sample_model() {
  auto m = init_model({50, 30, 20, 5}, 4, 21, 0.37);
  m.sp_coordinates = {{0, {0.5, 0.5}}, {1, {1.5, 0.5}}, {2, {0.5, 1.5}}, {3, {1.0 / 3.0, 2.5}}};
  m.normalization = {0.001234, 1.9876};
  m.hyperparameters = {{"learning_rate", "0.001"}, {"max_epoch", "500"}};
  m.seed = 21;
  for (auto t : m.params.tensors())
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += 1e-17 * double(i) + 1.0 / 7.0;
  return m;
}

void expect_same(const SaeModel& a, const SaeModel& b) {
  const auto ta = a.params.tensors(), tb = b.params.tensors();
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t t = 0; t < ta.size(); ++t) {
    ASSERT_EQ(ta[t].size(), tb[t].size());
    for (std::size_t i = 0; i < ta[t].size(); ++i) ASSERT_EQ(ta[t][i], tb[t][i]);
  }
  EXPECT_EQ(a.label_count, b.label_count);
  EXPECT_EQ(a.normalization, b.normalization);
  EXPECT_EQ(a.optimizer, b.optimizer);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.hyperparameters, b.hyperparameters);
  ASSERT_EQ(a.sp_coordinates.size(), b.sp_coordinates.size());
  for (std::size_t i = 0; i < a.sp_coordinates.size(); ++i) {
    EXPECT_EQ(a.sp_coordinates[i].id, b.sp_coordinates[i].id);
    EXPECT_EQ(a.sp_coordinates[i].position, b.sp_coordinates[i].position);
  }
}

TEST(ModelIo, ExactRoundTripThroughFile) {
  test::TempDir dir("model_io");
  const auto m = sample_model();
  save_model(m, dir / "m.json");
  const auto back = load_model(dir / "m.json");
  expect_same(m, back);
  std::vector<double> x(90, 0.25);
  EXPECT_EQ(forward(m, x, 3).output, forward(back, x, 3).output);
  EXPECT_FALSE(std::filesystem::exists(dir / "m.json.tmp"));
}

TEST(ModelIo, SerializationIsStable) {
  const auto m = sample_model();
  EXPECT_EQ(model_to_json(m), model_to_json(model_from_json(model_to_json(m))));
}

TEST(ModelIo, RejectsBadDocuments) {
  const auto good = nlohmann::json::parse(model_to_json(sample_model()));
  auto expect_bad = [](const nlohmann::json& j) {
    EXPECT_THROW(model_from_json(j.dump()), Error) << j.dump().substr(0, 80);
  };
  EXPECT_THROW(model_from_json("{not json"), Error);
  auto j = good;
  j["format"] = "something-else";
  expect_bad(j);
  j = good;
  j["version"] = 99;
  expect_bad(j);
  j = good;
  j["encoder"][0]["weights"].erase(0);
  expect_bad(j);
  j = good;
  j["label_count"] = 5;
  expect_bad(j);
  j = good;
  j["decoder"][3]["biases"].push_back(0.0);
  expect_bad(j);
  j = good;
  j.erase("sp_coordinates");
  expect_bad(j);
}

TEST(ModelIo, MissingFileIsIoError) {
  try {
    load_model("/nonexistent/dir/model.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

}  // namespace
}  // namespace deeppos
