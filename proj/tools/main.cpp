// sentivec: joint sentiment-aware word embeddings and logistic classification.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sentivec/sentivec.hpp"

namespace {

using namespace sentivec;

// Flags shared by train/eval/tune; mirrored into TrainConfig.
struct TrainFlags {
  int k = 0;
  double epsilon = 0.3;
  double lambda = 1e-3;
  double eta = 0.1;
  int tau = 50;
  int iters = 50;
  double tol = 1e-5;
  std::string weighting = "tf";
  std::uint64_t seed = 0;
  std::string init = "lsa";
  bool lsa_sigma = false;
  bool literal_decay = false;
  std::string labels;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  auto* k_opt = cmd->add_option("--k", f.k, "Embedding dimension (overrides --epsilon)");
  cmd->add_option("--epsilon", f.epsilon,
                  "Spectrum tail-energy bound for dimension selection; default 0.3 "
                  "(0.15 used for the noise-free synthetic corpus)")
      ->excludes(k_opt)
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--lambda", f.lambda, "L2 penalty on theta")->check(CLI::NonNegativeNumber);
  cmd->add_option("--eta", f.eta, "Initial SGD step size")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", f.tau, "Suffix-averaging window")->check(CLI::PositiveNumber);
  cmd->add_option("--iters", f.iters, "Maximum outer iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Outer convergence tolerance on the objective")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--weighting", f.weighting, "Document weighting: tf or tfidf")
      ->check(CLI::IsMember({"tf", "tfidf"}));
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--init", f.init, "Embedding initialization: lsa, random, or file:PATH");
  cmd->add_flag("--lsa-sigma", f.lsa_sigma,
                "Scale LSA vectors by singular values before normalization");
  cmd->add_flag("--literal-decay", f.literal_decay,
                "Divide the running step by t each document instead of using eta/t");
  cmd->add_option("--labels", f.labels,
                  "Label mapping POS:NEG for corpus files with custom label strings");
}

TrainConfig to_config(const TrainFlags& f) {
  TrainConfig cfg;
  cfg.k = f.k;
  cfg.epsilon = f.epsilon;
  cfg.lambda_theta = f.lambda;
  cfg.eta0 = f.eta;
  cfg.tau = f.tau;
  cfg.max_outer_iters = f.iters;
  cfg.convergence_tol = f.tol;
  cfg.weighting = term_weighting_from_string(f.weighting);
  cfg.seed = f.seed;
  if (f.init == "lsa") {
    cfg.init = InitMethod::lsa;
  } else if (f.init == "random") {
    cfg.init = InitMethod::random;
  } else if (f.init.rfind("file:", 0) == 0) {
    cfg.init = InitMethod::file;
    cfg.init_file = f.init.substr(5);
  } else {
    throw std::invalid_argument("--init must be lsa, random, or file:PATH (got '" + f.init + "')");
  }
  cfg.lsa_scale_by_sigma = f.lsa_sigma;
  cfg.decay = f.literal_decay ? StepDecay::factorial : StepDecay::harmonic;
  cfg.validate();
  return cfg;
}

std::optional<LabelMapping> to_mapping(const std::string& labels) {
  if (labels.empty()) return std::nullopt;
  const auto colon = labels.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == labels.size()) {
    throw std::invalid_argument("--labels expects POS:NEG, got '" + labels + "'");
  }
  return LabelMapping{labels.substr(0, colon), labels.substr(colon + 1)};
}

// Canonical flag echo embedded in artifact headers so every file records
// how to re-derive it.
std::string train_flag_echo(const TrainFlags& f) {
  std::ostringstream out;
  if (f.k > 0) {
    out << " --k " << f.k;
  } else {
    out << " --epsilon " << format_double(f.epsilon);
  }
  out << " --init " << f.init << " --lambda " << format_double(f.lambda) << " --eta "
      << format_double(f.eta) << " --tau " << f.tau << " --iters " << f.iters << " --tol "
      << format_double(f.tol) << " --weighting " << f.weighting << " --seed " << f.seed;
  if (f.lsa_sigma) out << " --lsa-sigma";
  if (f.literal_decay) out << " --literal-decay";
  if (!f.labels.empty()) out << " --labels " << f.labels;
  return out.str();
}

void print_train_summary(const TrainedModel& model) {
  std::cout << "k\t" << model.config.k << "\n";
  std::cout << "iterations\t" << model.trace.iterations << "\n";
  std::cout << "converged\t" << (model.trace.converged ? 1 : 0) << "\n";
  std::cout << "initial_objective\t" << format_double(model.trace.initial_objective) << "\n";
  std::cout << "final_objective\t" << format_double(model.trace.final_objective()) << "\n";
  std::ostringstream trace;
  for (std::size_t i = 0; i < model.trace.objectives.size(); ++i) {
    if (i) trace << ',';
    trace << format_double(model.trace.objectives[i]);
  }
  std::cout << "trace\t" << trace.str() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{
      "sentivec: sentiment-aware word embeddings trained jointly with a logistic classifier"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a polarized synthetic corpus");
  std::string synth_out;
  SynthConfig synth_cfg;
  synth_cmd->add_option("--out", synth_out, "Output corpus TSV path")->required();
  synth_cmd->add_option("--docs", synth_cfg.n_docs, "Number of documents");
  synth_cmd->add_option("--pos-frac", synth_cfg.positive_doc_fraction,
                        "Fraction of positive documents");
  synth_cmd->add_option("--threshold", synth_cfg.polarity_threshold,
                        "Minimum same-polarity token fraction per document");
  synth_cmd->add_option("--seed", synth_cfg.seed, "RNG seed");

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Effective-rank curve and dimension selection");
  std::string rank_corpus;
  std::string rank_out;
  std::string rank_weighting = "tf";
  std::string rank_labels;
  double rank_epsilon = 0.0;
  rank_cmd->add_option("--corpus", rank_corpus, "Corpus TSV path")
      ->required()
      ->check(CLI::ExistingFile);
  rank_cmd->add_option("--epsilon", rank_epsilon, "Tail-energy bound")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  rank_cmd->add_option("--weighting", rank_weighting, "Document weighting: tf or tfidf")
      ->check(CLI::IsMember({"tf", "tfidf"}));
  rank_cmd->add_option("--labels", rank_labels, "Label mapping POS:NEG");
  rank_cmd->add_option("--out", rank_out, "Write the curve as TSV to this path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a labeled corpus");
  std::string train_corpus;
  std::string train_out;
  std::string train_emb_out;
  TrainFlags train_flags;
  train_cmd->add_option("--corpus", train_corpus, "Corpus TSV path")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Output model path")->required();
  train_cmd->add_option("--emb-out", train_emb_out,
                        "Also export embeddings in text format to this path");
  add_train_flags(train_cmd, train_flags);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Multi-split train/test evaluation");
  std::string eval_corpus;
  std::string eval_out;
  int eval_splits = 10;
  double eval_test_frac = 0.2;
  TrainFlags eval_flags;
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus TSV path")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--splits", eval_splits, "Number of stratified splits")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--test-frac", eval_test_frac, "Held-out fraction per split");
  eval_cmd->add_option("--out", eval_out, "Write the per-split report TSV to this path");
  add_train_flags(eval_cmd, eval_flags);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Score documents with a trained model");
  std::string predict_model;
  std::string predict_in;
  std::string predict_out;
  std::string predict_labels;
  predict_cmd->add_option("--model", predict_model, "Model path")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--in", predict_in, "Corpus TSV to score")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--labels", predict_labels, "Label mapping POS:NEG");
  predict_cmd->add_option("--out", predict_out, "Write predictions TSV to this path");

  // neighbors
  auto* nbr_cmd = app.add_subcommand("neighbors", "Cosine-similarity word queries");
  std::string nbr_model;
  std::string nbr_word;
  int nbr_top = 10;
  bool nbr_farthest = false;
  nbr_cmd->add_option("--model", nbr_model, "Model path")->required()->check(CLI::ExistingFile);
  nbr_cmd->add_option("--word", nbr_word, "Query word")->required();
  nbr_cmd->add_option("--top", nbr_top, "Number of neighbors")->check(CLI::PositiveNumber);
  nbr_cmd->add_flag("--farthest", nbr_farthest, "Rank most dissimilar words first");

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "Cross-validate the lambda grid");
  std::string tune_corpus;
  std::string tune_grid;
  std::string tune_out;
  int tune_folds = 5;
  TrainFlags tune_flags;
  tune_cmd->add_option("--corpus", tune_corpus, "Corpus TSV path")
      ->required()
      ->check(CLI::ExistingFile);
  tune_cmd->add_option("--grid", tune_grid, "Comma-separated lambda values")->required();
  tune_cmd->add_option("--folds", tune_folds, "Cross-validation folds")
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("--out", tune_out, "Write the selection table TSV to this path");
  add_train_flags(tune_cmd, tune_flags);

  CLI11_PARSE(app, argc, argv);

  if (synth_cmd->parsed()) {
    const Corpus corpus = generate_synthetic(synth_cfg);
    std::ostringstream echo;
    echo << "sentivec synth --out " << synth_out << " --docs " << synth_cfg.n_docs
         << " --pos-frac " << format_double(synth_cfg.positive_doc_fraction) << " --threshold "
         << format_double(synth_cfg.polarity_threshold) << " --seed " << synth_cfg.seed;
    write_corpus_tsv(synth_out, corpus, echo.str());
    std::cout << "documents\t" << corpus.size() << "\n";
    std::cout << "written\t" << synth_out << "\n";
    return 0;
  }

  if (rank_cmd->parsed()) {
    const Corpus corpus = read_corpus_tsv(rank_corpus, to_mapping(rank_labels));
    const TrainingData data =
        prepare_training_data(corpus, term_weighting_from_string(rank_weighting));
    const EffectiveRankCurve curve = effective_rank(data.phi, rank_epsilon);
    std::cout << "chosen_k\t" << curve.chosen_k << "\n";
    std::ostringstream tsv;
    tsv << "# sentivec rank --corpus " << rank_corpus << " --epsilon "
        << format_double(rank_epsilon) << " --weighting " << rank_weighting;
    if (!rank_labels.empty()) tsv << " --labels " << rank_labels;
    tsv << "\n# chosen_k\t" << curve.chosen_k << "\nk\terr\n";
    for (std::size_t i = 0; i < curve.err.size(); ++i) {
      tsv << (i + 1) << '\t' << format_double(curve.err[i]) << '\n';
    }
    if (rank_out.empty()) {
      std::cout << tsv.str();
    } else {
      atomic_write_file(rank_out, tsv.str());
      std::cout << "written\t" << rank_out << "\n";
    }
    return 0;
  }

  if (train_cmd->parsed()) {
    const TrainConfig cfg = to_config(train_flags);
    const Corpus corpus = read_corpus_tsv(train_corpus, to_mapping(train_flags.labels));
    const TrainedModel model = train(corpus, cfg);
    std::string invocation = "sentivec train --corpus " + train_corpus + " --out " + train_out +
                             train_flag_echo(train_flags);
    if (!train_emb_out.empty()) invocation += " --emb-out " + train_emb_out;
    save_model(train_out, model, invocation);
    if (!train_emb_out.empty()) {
      write_embeddings(train_emb_out, model.embedding.w, model.vocab.words);
    }
    print_train_summary(model);
    std::cout << "written\t" << train_out << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    const TrainConfig cfg = to_config(eval_flags);
    const Corpus corpus = read_corpus_tsv(eval_corpus, to_mapping(eval_flags.labels));
    const SplitSet splits = stratified_splits(corpus, eval_splits, eval_test_frac, cfg.seed);
    const EvalReport report = evaluate_splits(corpus, splits, cfg);
    std::ostringstream echo;
    echo << "sentivec eval --corpus " << eval_corpus << " --splits " << eval_splits
         << " --test-frac " << format_double(eval_test_frac) << train_flag_echo(eval_flags);
    std::cout << "splits\t" << report.splits.size() << "\n";
    std::cout << "mean_precision\t" << format_double(report.mean_precision) << "\n";
    std::cout << "std_precision\t" << format_double(report.std_precision) << "\n";
    std::cout << "undefined_precision\t" << report.n_undefined_precision << "\n";
    std::cout << "mean_auc\t" << format_double(report.mean_auc) << "\n";
    std::cout << "std_auc\t" << format_double(report.std_auc) << "\n";
    if (!eval_out.empty()) {
      atomic_write_file(eval_out, report_to_tsv(report, echo.str()));
      std::cout << "written\t" << eval_out << "\n";
    } else {
      std::cout << report_to_tsv(report, echo.str());
    }
    return 0;
  }

  if (predict_cmd->parsed()) {
    const TrainedModel model = load_model(predict_model);
    const Corpus docs = read_corpus_tsv(predict_in, to_mapping(predict_labels));
    const Eigen::VectorXd probs = predict_corpus(model, docs);
    std::ostringstream out;
    if (!predict_out.empty()) {
      out << "# sentivec predict --model " << predict_model << " --in " << predict_in;
      if (!predict_labels.empty()) out << " --labels " << predict_labels;
      out << "\n";
    }
    out << "doc\tprobability\tlabel\n";
    for (int i = 0; i < probs.size(); ++i) {
      out << i << '\t' << format_double(probs(i)) << '\t' << (probs(i) > 0.5 ? "+1" : "-1")
          << '\n';
    }
    if (predict_out.empty()) {
      std::cout << out.str();
    } else {
      atomic_write_file(predict_out, out.str());
      std::cout << "written\t" << predict_out << "\n";
    }
    return 0;
  }

  if (nbr_cmd->parsed()) {
    const TrainedModel model = load_model(nbr_model);
    const NeighborResult result =
        neighbors(model, nbr_word, nbr_top,
                  nbr_farthest ? NeighborDirection::farthest : NeighborDirection::nearest);
    std::cout << "query\t" << result.query << "\t"
              << (nbr_farthest ? "farthest" : "nearest") << "\n";
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
      std::cout << (i + 1) << '\t' << result.ranked[i].first << '\t'
                << format_double(result.ranked[i].second) << '\n';
    }
    return 0;
  }

  if (tune_cmd->parsed()) {
    const TrainConfig cfg = to_config(tune_flags);
    const Corpus corpus = read_corpus_tsv(tune_corpus, to_mapping(tune_flags.labels));
    std::vector<double> grid;
    std::stringstream gs(tune_grid);
    std::string item;
    while (std::getline(gs, item, ',')) {
      if (item.empty()) continue;
      grid.push_back(std::stod(item));
    }
    const LambdaSelection sel = tune_lambda(corpus, grid, cfg, cfg.seed, tune_folds);
    std::ostringstream echo;
    echo << "sentivec tune --corpus " << tune_corpus << " --grid " << tune_grid << " --folds "
         << tune_folds << train_flag_echo(tune_flags);
    std::cout << "best_lambda\t" << format_double(sel.best_lambda) << "\n";
    if (!tune_out.empty()) {
      atomic_write_file(tune_out, lambda_table_to_tsv(sel, echo.str()));
      std::cout << "written\t" << tune_out << "\n";
    } else {
      std::cout << lambda_table_to_tsv(sel, echo.str());
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
