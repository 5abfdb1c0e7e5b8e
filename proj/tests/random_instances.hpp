#pragma once

// Random instances satisfying the standing assumptions.

#include "pss/lp_core.hpp"
#include "pss/model.hpp"

#include <optional>
#include <random>

namespace pss::test {

inline PssInstance random_decomposable(std::mt19937_64& rng, std::size_t I, std::size_t K) {
  std::uniform_int_distribution<int> small(1, 9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PssInstance inst;
  inst.num_classes = I;
  inst.num_servers = K;
  RationalVector alpha, beta, weight;
  Rational beta_sum = 0, weight_sum = 0;
  for (std::size_t i = 0; i < I; ++i) alpha.push_back(Rational(small(rng)));
  for (std::size_t k = 0; k < K; ++k) {
    beta.push_back(Rational(small(rng)));
    beta_sum += beta.back();
  }
  for (std::size_t i = 0; i < I; ++i) {
    weight.push_back(Rational(small(rng)));
    weight_sum += weight.back();
  }
  for (std::size_t i = 0; i < I; ++i) {
    // scale alpha so rates are O(beta_sum)
    inst.lambda.push_back(alpha[i] * beta_sum * weight[i] / weight_sum);
    inst.hat_lambda.push_back(unit(rng) - 0.5);
    inst.c2_arrival.push_back(0.25 + 2.0 * unit(rng));
    inst.h.push_back(0.5 + unit(rng));
  }
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      inst.activities.push_back({i, k});
      inst.mu.push_back(alpha[i] * beta[k]);
      inst.hat_mu.push_back(unit(rng) - 0.5);
      inst.c2_service.push_back(2.0 * unit(rng));
    }
  }
  inst.gamma = 0.5 + unit(rng);
  return inst;
}

// Random activity graph covering every class and server, integer rates, and
// lambda = R xi / rho* for a random fully loading xi. Generic rates usually
// leave some activities always nonbasic. Returns nullopt if the draw fails
// full load or dual uniqueness.
inline std::optional<PssInstance> random_general(std::mt19937_64& rng, std::size_t I, std::size_t K) {
  std::uniform_int_distribution<int> small(1, 9);
  std::uniform_int_distribution<std::size_t> pick_class(0, I - 1), pick_server(0, K - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<bool>> edge(I, std::vector<bool>(K, false));
  for (std::size_t i = 0; i < I; ++i) edge[i][pick_server(rng)] = true;
  for (std::size_t k = 0; k < K; ++k) edge[pick_class(rng)][k] = true;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      if (unit(rng) < 0.4) edge[i][k] = true;
    }
  }

  PssInstance inst;
  inst.num_classes = I;
  inst.num_servers = K;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      if (!edge[i][k]) continue;
      inst.activities.push_back({i, k});
      inst.mu.push_back(Rational(small(rng)));
      inst.hat_mu.push_back(unit(rng) - 0.5);
      inst.c2_service.push_back(unit(rng) < 0.2 ? 0.0 : 2.0 * unit(rng));
    }
  }
  RationalVector xi(inst.num_activities());
  for (std::size_t k = 0; k < K; ++k) {
    const auto acts = inst.activities_of_server(k);
    Rational total = 0;
    for (std::size_t j : acts) {
      xi[j] = Rational(small(rng));
      total += xi[j];
    }
    for (std::size_t j : acts) xi[j] /= total;
  }
  inst.lambda.assign(I, Rational(0));
  for (std::size_t j = 0; j < inst.num_activities(); ++j) inst.lambda[inst.activities[j].class_index] += inst.mu[j] * xi[j];
  for (std::size_t i = 0; i < I; ++i) {
    inst.hat_lambda.push_back(unit(rng) - 0.5);
    inst.c2_arrival.push_back(0.25 + 2.0 * unit(rng));
    inst.h.push_back(0.5 + unit(rng));
  }
  inst.gamma = 0.5 + unit(rng);

  const Rational rho = solve_primal(inst).rho_star;
  for (auto& l : inst.lambda) l /= rho;
  validate(inst);
  if (!validate_assumptions(inst).all()) return std::nullopt;
  return inst;
}

}  // namespace pss::test
