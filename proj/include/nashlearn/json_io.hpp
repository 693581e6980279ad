#pragma once

#include "nashlearn/diagnostics.hpp"
#include "nashlearn/games.hpp"
#include "nashlearn/schedule.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nashlearn {

using GameVariant = std::variant<QuadraticAggregativeGame, SmoothTestGame>;

/// A persisted game instance; equilibria are cached alongside so every run
/// against the instance measures error against the same ground truth.
struct InstanceDocument {
  GameVariant game;
  std::vector<Eigen::VectorXd> equilibria;
};

namespace json_detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("instance JSON: bad matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = j.at(k).get<double>();
  return v;
}

inline nlohmann::json quadratic_to_json(const QuadraticAggregativeGame& g) {
  nlohmann::json j;
  j["type"] = "quadratic_aggregative";
  j["num_players"] = g.num_players();
  j["dim"] = g.dim();
  for (int i = 0; i < g.num_players(); ++i) {
    j["Qm"].push_back(matrix_to_json(g.value_mat(i)));
    j["Cm"].push_back(matrix_to_json(g.price_mat(i)));
    j["cv"].push_back(vector_to_json(g.price_offset(i)));
    const auto& s = g.action_sets()[i];
    j["sets"].push_back({{"dim", s.dimension()}, {"upper", s.upper()}, {"budget", s.budget()}});
  }
  return j;
}

inline QuadraticAggregativeGame quadratic_from_json(const nlohmann::json& j) {
  const int n = j.at("num_players").get<int>();
  std::vector<Eigen::MatrixXd> Qm, Cm;
  std::vector<Eigen::VectorXd> cv;
  std::vector<BoxBudgetSet> sets;
  for (int i = 0; i < n; ++i) {
    Qm.push_back(matrix_from_json(j.at("Qm").at(i)));
    Cm.push_back(matrix_from_json(j.at("Cm").at(i)));
    cv.push_back(vector_from_json(j.at("cv").at(i)));
    const auto& s = j.at("sets").at(i);
    sets.emplace_back(s.at("dim").get<int>(), s.at("upper").get<double>(),
                      s.at("budget").get<double>());
  }
  return QuadraticAggregativeGame(std::move(Qm), std::move(Cm), std::move(cv), std::move(sets));
}

}  // namespace json_detail

inline nlohmann::json to_json(const InstanceDocument& doc) {
  nlohmann::json j;
  if (const auto* q = std::get_if<QuadraticAggregativeGame>(&doc.game)) {
    j = json_detail::quadratic_to_json(*q);
  } else {
    const auto& s = std::get<SmoothTestGame>(doc.game);
    j = json_detail::quadratic_to_json(s.quadratic_part());
    j["type"] = "smooth_test";
    j["epsilon"] = s.epsilon();
  }
  if (!doc.equilibria.empty()) {
    for (const auto& eq : doc.equilibria) j["equilibria"].push_back(json_detail::vector_to_json(eq));
  }
  return j;
}

inline InstanceDocument instance_from_json(const nlohmann::json& j) {
  InstanceDocument doc{QuadraticAggregativeGame(json_detail::quadratic_from_json(j)), {}};
  const std::string type = j.at("type").get<std::string>();
  if (type == "smooth_test") {
    doc.game = SmoothTestGame(json_detail::quadratic_from_json(j), j.at("epsilon").get<double>());
  } else if (type != "quadratic_aggregative") {
    throw std::invalid_argument("instance JSON: unknown game type '" + type + "'");
  }
  if (j.contains("equilibria")) {
    for (const auto& eq : j.at("equilibria")) {
      doc.equilibria.push_back(json_detail::vector_from_json(eq));
    }
  }
  return doc;
}

inline void write_instance(const std::string& path, const InstanceDocument& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_instance: cannot open " + path);
  out << to_json(doc).dump(2) << '\n';
}

inline InstanceDocument read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_instance: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return instance_from_json(j);
}

inline nlohmann::json to_json(const AssumptionReport& r) {
  return {{"per_player_convex", r.per_player_convex},
          {"psd_hat_M", r.psd_hat_M},
          {"lipschitz_estimate", r.lipschitz_estimate}};
}

inline nlohmann::json to_json(const ScheduleValidation& v) {
  return {{"valid", v.valid}, {"violated", v.violated}};
}

inline nlohmann::json to_json(const EstimatorReport& r) {
  return {{"mc_mean", json_detail::vector_to_json(r.mc_mean.vec())},
          {"analytic", json_detail::vector_to_json(r.analytic.vec())},
          {"std_err", json_detail::vector_to_json(r.std_err.vec())},
          {"n_samples", r.n_samples},
          {"max_z_score", r.max_z_score}};
}

inline nlohmann::json to_json(const MixedMappingEstimate& r) {
  return {{"mc_mean", json_detail::vector_to_json(r.mc_mean.vec())},
          {"std_err", json_detail::vector_to_json(r.std_err.vec())},
          {"n_samples", r.n_samples}};
}

inline nlohmann::json to_json(const BiasReport& r) {
  return {{"sigmas", r.sigmas},
          {"q_norms", r.q_norms},
          {"ratios", r.ratios},
          {"analytic_norms", r.analytic_norms},
          {"std_err_norms", r.std_err_norms},
          {"max_z_scores", r.max_z_scores},
          {"n_samples", r.n_samples}};
}

}  // namespace nashlearn
