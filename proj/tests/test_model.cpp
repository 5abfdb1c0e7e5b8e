#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace pss {
namespace {

using test::load;
using test::Q;
using test::Qv;

TEST(LoadInstance, ExampleA) {
  const PssInstance inst = load("example_a1");
  EXPECT_EQ(inst.num_classes, 2u);
  EXPECT_EQ(inst.num_servers, 2u);
  ASSERT_EQ(inst.num_activities(), 4u);
  EXPECT_EQ(inst.lambda, Qv({"5", "4"}));
  EXPECT_EQ(inst.mu, Qv({"3", "4", "6", "8"}));
  EXPECT_EQ(inst.activities[2], (ActivityId{1, 0}));
}

TEST(LoadInstance, SmallestLegalInstance) {
  const PssInstance inst = load_instance(R"({
    "classes": [{"lambda": 1, "hat_lambda": 0, "c2_a": 1, "h": 1}],
    "servers": 1,
    "activities": [{"i": 1, "k": 1, "mu": 1, "hat_mu": 0, "c2_s": 1}],
    "gamma": 1
  })");
  EXPECT_EQ(inst.num_activities(), 1u);
}

TEST(LoadInstance, RationalStringsAreExact) {
  const PssInstance inst = load("example_b");
  EXPECT_EQ(inst.lambda[0], Q("7/2"));
  EXPECT_EQ(parse_rational("3.5"), Q("7/2"));
  EXPECT_EQ(parse_rational("-0.125"), Q("-1/8"));
}

TEST(LoadInstance, ZeroLambdaIsRejected) {
  try {
    load_instance(R"({
      "classes": [{"lambda": 0, "hat_lambda": 0, "c2_a": 1, "h": 1}],
      "servers": 1,
      "activities": [{"i": 1, "k": 1, "mu": 1, "hat_mu": 0, "c2_s": 1}],
      "gamma": 1
    })");
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda must be positive"), std::string::npos);
    EXPECT_EQ(e.field(), "classes[0].lambda");
  }
}

TEST(LoadInstance, DuplicateActivityIsRejected) {
  EXPECT_THROW(load_instance(R"({
      "classes": [{"lambda": 1, "hat_lambda": 0, "c2_a": 1, "h": 1}],
      "servers": 1,
      "activities": [{"i": 1, "k": 1, "mu": 1, "hat_mu": 0, "c2_s": 1},
                     {"i": 1, "k": 1, "mu": 2, "hat_mu": 0, "c2_s": 1}],
      "gamma": 1
    })"),
               InstanceError);
}

TEST(LoadInstance, ParseErrors) {
  EXPECT_THROW(load_instance("{not json"), ParseError);
  EXPECT_THROW(load_instance(R"({"classes": [], "servers": 1})"), ParseError);
  EXPECT_THROW(load_instance(R"({
      "classes": [{"lambda": "1/0", "hat_lambda": 0, "c2_a": 1, "h": 1}],
      "servers": 1,
      "activities": [{"i": 1, "k": 1, "mu": 1, "hat_mu": 0, "c2_s": 1}],
      "gamma": 1})"),
               ParseError);
}

TEST(LoadInstance, PositivityInvariants) {
  PssInstance inst = test::single_activity("1", "1");
  inst.c2_arrival[0] = 0.0;
  EXPECT_THROW(validate(inst), InstanceError);
  inst = test::single_activity("1", "1");
  inst.c2_service[0] = 0.0;
  EXPECT_NO_THROW(validate(inst));
  inst.gamma = 0.0;
  EXPECT_THROW(validate(inst), InstanceError);
  inst = test::single_activity("1", "1");
  inst.num_servers = 2;
  EXPECT_THROW(validate(inst), InstanceError);  // server 2 has no activity
}

TEST(BuildMatrices, ExampleA) {
  const MatrixPair m = build_matrices(load("example_a1"));
  EXPECT_EQ(m.R, (RationalMatrix{Qv({"3", "4", "0", "0"}), Qv({"0", "0", "6", "8"})}));
  EXPECT_EQ(m.G, (RationalMatrix{Qv({"1", "0", "1", "0"}), Qv({"0", "1", "0", "1"})}));
}

TEST(BuildMatrices, ExampleD) {
  const MatrixPair m = build_matrices(load("example_d"));
  EXPECT_EQ(m.R, (RationalMatrix{Qv({"3", "4", "0", "0", "0", "0", "0"}),
                                 Qv({"0", "0", "6", "8", "6", "0", "0"}),
                                 Qv({"0", "0", "0", "0", "0", "7", "6"})}));
  EXPECT_EQ(m.G, (RationalMatrix{Qv({"1", "0", "1", "0", "0", "0", "0"}),
                                 Qv({"0", "1", "0", "1", "0", "1", "0"}),
                                 Qv({"0", "0", "0", "0", "1", "0", "1"})}));
}

TEST(BuildMatrices, SingleActivity) {
  const MatrixPair m = build_matrices(test::single_activity("1", "1"));
  EXPECT_EQ(m.R, (RationalMatrix{Qv({"1"})}));
  EXPECT_EQ(m.G, (RationalMatrix{Qv({"1"})}));
}

TEST(BuildMatrices, EachColumnHasOneEntry) {
  const PssInstance inst = load("example_e");
  const MatrixPair m = build_matrices(inst);
  for (std::size_t j = 0; j < inst.num_activities(); ++j) {
    int r_nonzero = 0, g_ones = 0;
    for (const auto& row : m.R) r_nonzero += row[j] != 0;
    for (const auto& row : m.G) g_ones += row[j] == 1;
    EXPECT_EQ(r_nonzero, 1);
    EXPECT_EQ(g_ones, 1);
    EXPECT_EQ(m.R[inst.activities[j].class_index][j], inst.mu[j]);
    EXPECT_EQ(m.G[inst.activities[j].server_index][j], 1);
  }
}

// Property: save followed by load reproduces every field exactly.
TEST(InstanceRoundTrip, RandomInstances) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(1, 4);
  std::uniform_int_distribution<long long> num(1, 1'000'000'007LL);
  std::uniform_real_distribution<double> real(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    PssInstance inst;
    inst.num_classes = static_cast<std::size_t>(small(rng));
    inst.num_servers = static_cast<std::size_t>(small(rng));
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      for (std::size_t k = 0; k < inst.num_servers; ++k) {
        if (i == k % inst.num_classes || k == i % inst.num_servers || rng() % 2) {
          inst.activities.push_back({i, k});
        }
      }
    }
    for (std::size_t i = 0; i < inst.num_classes; ++i) {
      inst.lambda.push_back(Rational(num(rng), num(rng)));
      inst.hat_lambda.push_back(real(rng));
      inst.c2_arrival.push_back(std::abs(real(rng)) + 1e-3);
      inst.h.push_back(std::abs(real(rng)) + 0.1);
    }
    for (std::size_t j = 0; j < inst.num_activities(); ++j) {
      inst.mu.push_back(Rational(num(rng)) * num(rng) / num(rng));
      inst.hat_mu.push_back(real(rng));
      inst.c2_service.push_back(std::abs(real(rng)));
    }
    inst.gamma = std::abs(real(rng)) + 0.01;
    ASSERT_NO_THROW(validate(inst));
    EXPECT_EQ(load_instance(save_instance(inst)), inst) << save_instance(inst);
  }
}

}  // namespace
}  // namespace pss
