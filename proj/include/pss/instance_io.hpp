#pragma once

// JSON instance format:
//
//   {
//     "classes":    [ {"lambda": "5", "hat_lambda": 0.0, "c2_a": 1.0, "h": 1.0}, ... ],
//     "servers":    2,
//     "activities": [ {"i": 1, "k": 1, "mu": "3", "hat_mu": 0.0, "c2_s": 4.0}, ... ],
//     "gamma":      1.0
//   }
//
// Rationals (lambda, mu) are integers or strings "p/q" (decimal strings such as
// "3.5" are read exactly). Class and server indices are one-based.

#include "pss/model.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace pss {

class ParseError : public InstanceError {
 public:
  using InstanceError::InstanceError;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing key");
  return *it;
}

inline Rational read_rational(const nlohmann::json& v, const std::string& path) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, e.what());
  }
  throw ParseError(path, "expected an integer or a \"p/q\" string");
}

inline double read_real(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  return v.get<double>();
}

inline std::size_t read_index(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ParseError(path, "expected a positive integer index");
  }
  return static_cast<std::size_t>(v.get<long long>() - 1);
}

inline nlohmann::json write_rational(const Rational& r) {
  if (denominator(r) == 1 && abs(numerator(r)) < BigInt(1) << 53) {
    return numerator(r).convert_to<long long>();
  }
  return to_string(r);
}

}  // namespace detail

inline PssInstance instance_from_json(const nlohmann::json& doc) {
  using detail::require;
  PssInstance inst;
  const auto& classes = require(doc, "classes", "");
  if (!classes.is_array()) throw ParseError("classes", "expected an array");
  inst.num_classes = classes.size();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string p = "classes[" + std::to_string(i) + "]";
    const auto& c = classes[i];
    inst.lambda.push_back(detail::read_rational(require(c, "lambda", p), p + ".lambda"));
    inst.hat_lambda.push_back(detail::read_real(require(c, "hat_lambda", p), p + ".hat_lambda"));
    inst.c2_arrival.push_back(detail::read_real(require(c, "c2_a", p), p + ".c2_a"));
    inst.h.push_back(detail::read_real(require(c, "h", p), p + ".h"));
  }

  const auto& servers = require(doc, "servers", "");
  if (!servers.is_number_integer() || servers.get<long long>() < 0) {
    throw ParseError("servers", "expected a nonnegative integer");
  }
  inst.num_servers = static_cast<std::size_t>(servers.get<long long>());

  const auto& acts = require(doc, "activities", "");
  if (!acts.is_array()) throw ParseError("activities", "expected an array");
  for (std::size_t j = 0; j < acts.size(); ++j) {
    const std::string p = "activities[" + std::to_string(j) + "]";
    const auto& a = acts[j];
    ActivityId id{detail::read_index(require(a, "i", p), p + ".i"),
                  detail::read_index(require(a, "k", p), p + ".k")};
    inst.activities.push_back(id);
    inst.mu.push_back(detail::read_rational(require(a, "mu", p), p + ".mu"));
    inst.hat_mu.push_back(detail::read_real(require(a, "hat_mu", p), p + ".hat_mu"));
    inst.c2_service.push_back(detail::read_real(require(a, "c2_s", p), p + ".c2_s"));
  }
  inst.gamma = detail::read_real(require(doc, "gamma", ""), "gamma");

  validate(inst);
  return inst;
}

inline PssInstance load_instance(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

inline PssInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", "cannot open instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_instance(ss.str());
}

inline nlohmann::json instance_to_json(const PssInstance& inst) {
  nlohmann::json doc;
  doc["classes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < inst.num_classes; ++i) {
    doc["classes"].push_back({{"lambda", detail::write_rational(inst.lambda[i])},
                              {"hat_lambda", inst.hat_lambda[i]},
                              {"c2_a", inst.c2_arrival[i]},
                              {"h", inst.h[i]}});
  }
  doc["servers"] = inst.num_servers;
  doc["activities"] = nlohmann::json::array();
  for (std::size_t j = 0; j < inst.num_activities(); ++j) {
    doc["activities"].push_back({{"i", inst.activities[j].class_index + 1},
                                 {"k", inst.activities[j].server_index + 1},
                                 {"mu", detail::write_rational(inst.mu[j])},
                                 {"hat_mu", inst.hat_mu[j]},
                                 {"c2_s", inst.c2_service[j]}});
  }
  doc["gamma"] = inst.gamma;
  return doc;
}

inline std::string save_instance(const PssInstance& inst) { return instance_to_json(inst).dump(2); }

}  // namespace pss
