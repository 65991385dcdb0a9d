#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentivec/io_util.hpp"
#include "sentivec/optimizer.hpp"
#include "sentivec/spectrum.hpp"

namespace sentivec {

inline constexpr const char* kModelFormatTag = "sentivec-model-v1";

// Serializes a trained model. `invocation` records the producing command
// line so the artifact is self-describing; `embedding_path` switches the
// embedding matrix from inline storage to an external file reference (the
// referenced file must be written separately, via write_embeddings).
inline std::string model_to_json(const TrainedModel& model, const std::string& invocation,
                                 const std::string& embedding_path = "") {
  nlohmann::ordered_json j;
  j["invocation"] = invocation;
  j["format"] = kModelFormatTag;
  j["k"] = model.config.k;
  j["gamma"] = model.clf.gamma;
  j["lambda_theta"] = model.clf.lambda_theta;
  j["theta"] = std::vector<double>(model.clf.theta.data(),
                                   model.clf.theta.data() + model.clf.theta.size());
  j["vocabulary"] = model.vocab.words;
  j["weighting"] = to_string(model.config.weighting);
  if (model.idf.size() > 0) {
    j["idf"] = std::vector<double>(model.idf.data(), model.idf.data() + model.idf.size());
  }
  if (embedding_path.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < model.embedding.w.rows(); ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int c = 0; c < model.embedding.w.cols(); ++c) row.push_back(model.embedding.w(r, c));
      rows.push_back(std::move(row));
    }
    j["embedding"] = std::move(rows);
  } else {
    j["embedding_file"] = embedding_path;
  }
  nlohmann::ordered_json cfg;
  cfg["epsilon"] = model.config.epsilon;
  cfg["eta0"] = model.config.eta0;
  cfg["tau"] = model.config.tau;
  cfg["max_outer_iters"] = model.config.max_outer_iters;
  cfg["convergence_tol"] = model.config.convergence_tol;
  cfg["seed"] = model.config.seed;
  cfg["init"] = to_string(model.config.init);
  cfg["lsa_scale_by_sigma"] = model.config.lsa_scale_by_sigma;
  j["config"] = std::move(cfg);
  nlohmann::ordered_json trace;
  trace["initial_objective"] = model.trace.initial_objective;
  trace["objectives"] = model.trace.objectives;
  trace["iterations"] = model.trace.iterations;
  trace["converged"] = model.trace.converged;
  j["trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& model,
                       const std::string& invocation, const std::string& embedding_path = "") {
  atomic_write_file(path, model_to_json(model, invocation, embedding_path));
}

inline TrainedModel model_from_json(const std::string& content,
                                    const std::filesystem::path& base_dir = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model artifact is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kModelFormatTag) {
    throw std::runtime_error("model artifact is missing the '" +
                             std::string(kModelFormatTag) + "' format tag");
  }
  TrainedModel model;
  model.config.k = j.at("k").get<int>();
  model.clf.gamma = j.at("gamma").get<double>();
  model.clf.lambda_theta = j.at("lambda_theta").get<double>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (static_cast<int>(theta.size()) != model.config.k) {
    throw std::runtime_error("theta length does not match k");
  }
  model.clf.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
  model.config.lambda_theta = model.clf.lambda_theta;

  for (const auto& word : j.at("vocabulary").get<std::vector<std::string>>()) {
    model.vocab.add(word);
  }
  if (model.vocab.words.empty()) throw std::runtime_error("model vocabulary is empty");
  model.config.weighting = term_weighting_from_string(j.value("weighting", "tf"));
  if (j.contains("idf")) {
    const auto idf = j.at("idf").get<std::vector<double>>();
    if (idf.size() != model.vocab.words.size()) {
      throw std::runtime_error("idf length does not match the vocabulary");
    }
    model.idf = Eigen::Map<const Eigen::VectorXd>(idf.data(), idf.size());
  } else if (model.config.weighting == TermWeighting::tf_idf) {
    throw std::runtime_error("tf-idf model artifact is missing its idf table");
  }

  const int k = model.config.k;
  const int v = model.vocab.size();
  if (j.contains("embedding")) {
    const auto& rows = j.at("embedding");
    if (static_cast<int>(rows.size()) != k) {
      throw std::runtime_error("inline embedding row count does not match k");
    }
    model.embedding.w.resize(k, v);
    for (int r = 0; r < k; ++r) {
      if (static_cast<int>(rows[r].size()) != v) {
        throw std::runtime_error("inline embedding row " + std::to_string(r) +
                                 " does not match the vocabulary size");
      }
      for (int c = 0; c < v; ++c) model.embedding.w(r, c) = rows[r][c].get<double>();
    }
  } else if (j.contains("embedding_file")) {
    std::filesystem::path p = j.at("embedding_file").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    model.embedding.w = read_embeddings(p, model.vocab, k, /*seed=*/0);
  } else {
    throw std::runtime_error("model artifact holds neither an inline embedding nor a file reference");
  }

  if (j.contains("config")) {
    const auto& cfg = j.at("config");
    model.config.epsilon = cfg.value("epsilon", model.config.epsilon);
    model.config.eta0 = cfg.value("eta0", model.config.eta0);
    model.config.tau = cfg.value("tau", model.config.tau);
    model.config.max_outer_iters = cfg.value("max_outer_iters", model.config.max_outer_iters);
    model.config.convergence_tol = cfg.value("convergence_tol", model.config.convergence_tol);
    model.config.seed = cfg.value("seed", model.config.seed);
    if (cfg.contains("init")) {
      const std::string init = cfg.at("init").get<std::string>();
      model.config.init = init == "lsa"    ? InitMethod::lsa
                          : init == "file" ? InitMethod::file
                                           : InitMethod::random;
    }
    model.config.lsa_scale_by_sigma = cfg.value("lsa_scale_by_sigma", false);
  }
  if (j.contains("trace")) {
    const auto& trace = j.at("trace");
    model.trace.initial_objective = trace.value("initial_objective", 0.0);
    if (trace.contains("objectives")) {
      model.trace.objectives = trace.at("objectives").get<std::vector<double>>();
    }
    model.trace.iterations = trace.value("iterations", 0);
    model.trace.converged = trace.value("converged", false);
  }
  return model;
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_file(path), path.parent_path());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace sentivec
