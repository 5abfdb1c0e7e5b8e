#pragma once

// Parallel server system data model: classes, servers, activities and the
// first/second-order rate data.

#include "pss/rational.hpp"

#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pss {

// Raised when an instance violates a structural or positivity invariant.
// `field()` names the offending entry, e.g. "classes[0].lambda".
class InstanceError : public std::runtime_error {
 public:
  InstanceError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Class/server pair. Indices are zero-based here; the file format is one-based.
struct ActivityId {
  std::size_t class_index = 0;
  std::size_t server_index = 0;

  friend bool operator==(const ActivityId&, const ActivityId&) = default;
  friend auto operator<=>(const ActivityId&, const ActivityId&) = default;
};

struct PssInstance {
  std::size_t num_classes = 0;
  std::size_t num_servers = 0;
  std::vector<ActivityId> activities;

  RationalVector lambda;           // per class
  RationalVector mu;               // per activity
  std::vector<double> hat_lambda;  // per class
  std::vector<double> hat_mu;      // per activity
  std::vector<double> c2_arrival;  // per class
  std::vector<double> c2_service;  // per activity
  std::vector<double> h;           // per class
  double gamma = 1.0;

  std::size_t num_activities() const { return activities.size(); }

  // Activities j with class_index == i, in activity order.
  std::vector<std::size_t> activities_of_class(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < activities.size(); ++j) {
      if (activities[j].class_index == i) out.push_back(j);
    }
    return out;
  }

  std::vector<std::size_t> activities_of_server(std::size_t k) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < activities.size(); ++j) {
      if (activities[j].server_index == k) out.push_back(j);
    }
    return out;
  }

  friend bool operator==(const PssInstance&, const PssInstance&) = default;
};

// Throws InstanceError on the first violated invariant.
inline void validate(const PssInstance& inst) {
  const std::size_t I = inst.num_classes;
  const std::size_t K = inst.num_servers;
  const std::size_t J = inst.activities.size();
  if (I == 0) throw InstanceError("classes", "at least one class is required");
  if (K == 0) throw InstanceError("servers", "at least one server is required");
  if (J == 0) throw InstanceError("activities", "at least one activity is required");

  auto require_size = [](std::size_t got, std::size_t want, const char* name) {
    if (got != want) {
      throw InstanceError(name, "expected " + std::to_string(want) + " entries, got " +
                                    std::to_string(got));
    }
  };
  require_size(inst.lambda.size(), I, "lambda");
  require_size(inst.hat_lambda.size(), I, "hat_lambda");
  require_size(inst.c2_arrival.size(), I, "c2_a");
  require_size(inst.h.size(), I, "h");
  require_size(inst.mu.size(), J, "mu");
  require_size(inst.hat_mu.size(), J, "hat_mu");
  require_size(inst.c2_service.size(), J, "c2_s");

  std::set<ActivityId> seen;
  std::vector<bool> class_covered(I, false);
  std::vector<bool> server_covered(K, false);
  for (std::size_t j = 0; j < J; ++j) {
    const auto& a = inst.activities[j];
    const std::string path = "activities[" + std::to_string(j) + "]";
    if (a.class_index >= I) throw InstanceError(path + ".i", "class index out of range");
    if (a.server_index >= K) throw InstanceError(path + ".k", "server index out of range");
    if (!seen.insert(a).second) {
      throw InstanceError(path, "duplicate activity (" + std::to_string(a.class_index + 1) + "," +
                                    std::to_string(a.server_index + 1) + ")");
    }
    class_covered[a.class_index] = true;
    server_covered[a.server_index] = true;
    if (inst.mu[j] <= 0) throw InstanceError(path + ".mu", "mu must be positive");
    if (!std::isfinite(inst.hat_mu[j])) throw InstanceError(path + ".hat_mu", "must be finite");
    if (!std::isfinite(inst.c2_service[j]) || inst.c2_service[j] < 0) {
      throw InstanceError(path + ".c2_s", "c2_s must be finite and nonnegative");
    }
  }
  for (std::size_t i = 0; i < I; ++i) {
    const std::string path = "classes[" + std::to_string(i) + "]";
    if (!class_covered[i]) throw InstanceError(path, "class has no activity");
    if (inst.lambda[i] <= 0) throw InstanceError(path + ".lambda", "lambda must be positive");
    if (!std::isfinite(inst.hat_lambda[i])) throw InstanceError(path + ".hat_lambda", "must be finite");
    if (!std::isfinite(inst.c2_arrival[i]) || inst.c2_arrival[i] <= 0) {
      throw InstanceError(path + ".c2_a", "c2_a must be positive and finite");
    }
    if (!std::isfinite(inst.h[i]) || inst.h[i] <= 0) {
      throw InstanceError(path + ".h", "h must be positive");
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!server_covered[k]) {
      throw InstanceError("servers", "server " + std::to_string(k + 1) + " has no activity");
    }
  }
  if (!std::isfinite(inst.gamma) || inst.gamma <= 0) {
    throw InstanceError("gamma", "gamma must be positive");
  }
}

// R is I x J with R(i,j) = mu_j for j in J_i; G is K x J with G(k,j) = 1 for j in J^k.
struct MatrixPair {
  RationalMatrix R;
  RationalMatrix G;
};

inline MatrixPair build_matrices(const PssInstance& inst) {
  const std::size_t J = inst.num_activities();
  MatrixPair m;
  m.R.assign(inst.num_classes, RationalVector(J, Rational(0)));
  m.G.assign(inst.num_servers, RationalVector(J, Rational(0)));
  for (std::size_t j = 0; j < J; ++j) {
    m.R[inst.activities[j].class_index][j] = inst.mu[j];
    m.G[inst.activities[j].server_index][j] = 1;
  }
  return m;
}

}  // namespace pss
