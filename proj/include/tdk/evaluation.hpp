#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tdk/dataset.hpp"
#include "tdk/feature_pipeline.hpp"
#include "tdk/metrics.hpp"

namespace tdk {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified k-fold split. Each class is shuffled with its own stream of the
/// seed and dealt round-robin over the folds, continuing from the fold where
/// the previous class stopped, so fold sizes and per-class counts both stay
/// within one of exact. Index lists are sorted.
std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct SearchGrid {
  std::vector<double> thetas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t max_blocks = 16;
};

struct TuningScore {
  double theta = 0.0;
  std::size_t blocks = 0;
  double mean_score = 0.0;
  std::vector<double> fold_scores;
};

struct TuningResult {
  double theta = 0.0;
  std::size_t blocks = 1;
  /// False when the grid held a single candidate and nothing was fitted.
  bool searched = false;
  std::vector<TuningScore> table;
};

/// Nested-CV selection of (θ, B). For every θ and inner fold, one model with
/// the maximum block count is fitted and each truncation b = 1..B_max is
/// scored from its feature prefix. Ties go to fewer blocks, then smaller θ.
/// `base` supplies the fit options and LDA shrinkage; its θ and block count
/// are ignored. `threads` > 1 runs the (θ, fold) fits concurrently with
/// identical results.
TuningResult tune_hyperparameters(const LabeledDataset& data, const SearchGrid& grid, std::size_t inner_folds,
                                  std::uint64_t seed, const DecoderConfig& base = {}, std::size_t threads = 1);

struct EvaluationOptions {
  std::size_t outer_folds = 5;
  std::size_t inner_folds = 5;
  SearchGrid grid;
  std::uint64_t seed = 0;
  DecoderConfig base;
  std::string dataset = "synthetic";
  std::string subject;
  std::string session;
  std::size_t threads = 1;
};

struct FoldOutcome {
  TuningResult tuning;
  Decoder decoder;
  std::vector<MetricsRecord> records;
};

/// Tunes on the training part of `fold`, refits the decoder there and scores
/// the held-out part. Nothing fitted sees the held-out labels or samples.
FoldOutcome evaluate_fold(const LabeledDataset& data, const Fold& fold, std::size_t fold_index,
                          const EvaluationOptions& options);

/// Outer stratified CV with nested tuning. Per fold it emits the held-out
/// score (roc_auc for two classes, accuracy otherwise) with the chosen (θ, B),
/// then one `nmse` row per fitted block carrying the training NMSE after it.
std::vector<MetricsRecord> run_evaluation(const LabeledDataset& data, const EvaluationOptions& options);

/// Seed for the inner split of outer fold `fold`.
std::uint64_t inner_seed(std::uint64_t seed, std::size_t fold);

}  // namespace tdk
