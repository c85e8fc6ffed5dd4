#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "tdk/evaluation.hpp"
#include "tdk/simd/kernels.hpp"

namespace tdk {
namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks write to
// their own slots, so the result does not depend on scheduling.
template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task task) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  const simd::Backend backend = simd::active_kernels().backend;
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(threads, count);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      simd::ScopedBackend pin(backend);
      for (std::size_t i = w; i < count; i += workers) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string describe(double theta, std::size_t fold) {
  return "theta=" + format_double(theta) + ", inner fold " + std::to_string(fold);
}

}  // namespace

TuningResult tune_hyperparameters(const LabeledDataset& data, const SearchGrid& grid, std::size_t inner_folds,
                                  std::uint64_t seed, const DecoderConfig& base, std::size_t threads) {
  if (grid.thetas.empty()) throw std::invalid_argument("tune_hyperparameters: empty theta grid");
  if (grid.max_blocks < 1) throw std::invalid_argument("tune_hyperparameters: max_blocks must be positive");
  if (inner_folds < 2) throw std::invalid_argument("tune_hyperparameters: need at least two inner folds");
  for (double theta : grid.thetas) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("tune_hyperparameters: theta outside [0, 1]");
  }

  TuningResult result;
  if (grid.thetas.size() == 1 && grid.max_blocks == 1) {
    result.theta = grid.thetas.front();
    result.blocks = 1;
    return result;
  }
  data.validate();
  const MetricKind kind = default_metric(data.class_count());
  const std::vector<Fold> folds = stratified_kfold(data.labels, inner_folds, seed);
  const std::size_t thetas = grid.thetas.size();

  // scores[t][f][b - 1]; θ = 1 fits a single block, so its vector is shorter.
  std::vector<std::vector<std::vector<double>>> scores(thetas, std::vector<std::vector<double>>(folds.size()));
  parallel_for(thetas * folds.size(), threads, [&](std::size_t task) {
    const std::size_t t = task / folds.size();
    const std::size_t f = task % folds.size();
    const double theta = grid.thetas[t];
    try {
      const LabeledDataset train = data.subset(folds[f].train);
      const LabeledDataset valid = data.subset(folds[f].test);
      const BttdaFit fit = fit_bttda(train, grid.max_blocks, theta, base.fit);
      const Matrix valid_features = bttda_transform(fit.model, valid.samples);
      std::vector<double>& out = scores[t][f];
      for (std::size_t b = 1; b <= fit.model.blocks.size(); ++b) {
        const auto width = static_cast<Eigen::Index>(feature_prefix_length(fit.model, b));
        const FeatureHead head = fit_feature_head(fit.features.leftCols(width), train.labels, base.lda_shrinkage);
        out.push_back(score_metric(head_scores(head, valid_features.leftCols(width)), valid.labels, kind));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("tuning failed (" + describe(theta, f) + "): " + e.what());
    }
  });

  result.searched = true;
  for (std::size_t t = 0; t < thetas; ++t) {
    const std::size_t available = scores[t].front().size();
    for (std::size_t b = 1; b <= available; ++b) {
      TuningScore entry;
      entry.theta = grid.thetas[t];
      entry.blocks = b;
      double sum = 0.0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        entry.fold_scores.push_back(scores[t][f][b - 1]);
        sum += scores[t][f][b - 1];
      }
      entry.mean_score = sum / static_cast<double>(folds.size());
      result.table.push_back(std::move(entry));
    }
  }

  const TuningScore* best = nullptr;
  for (const TuningScore& s : result.table) {
    if (best == nullptr || s.mean_score > best->mean_score ||
        (s.mean_score == best->mean_score &&
         (s.blocks < best->blocks || (s.blocks == best->blocks && s.theta < best->theta)))) {
      best = &s;
    }
  }
  result.theta = best->theta;
  result.blocks = best->blocks;
  return result;
}

FoldOutcome evaluate_fold(const LabeledDataset& data, const Fold& fold, std::size_t fold_index,
                          const EvaluationOptions& options) {
  FoldOutcome out;
  const LabeledDataset train = data.subset(fold.train);
  const LabeledDataset test = data.subset(fold.test);
  try {
    out.tuning = tune_hyperparameters(train, options.grid, options.inner_folds, inner_seed(options.seed, fold_index),
                                      options.base, options.threads);
    DecoderConfig config = options.base;
    config.theta = out.tuning.theta;
    config.blocks = out.tuning.blocks;
    out.decoder = fit_decoder(train, config);
  } catch (const std::exception& e) {
    throw std::runtime_error("outer fold " + std::to_string(fold_index) + ": " + e.what());
  }

  const MetricKind kind = default_metric(data.class_count());
  const Matrix scores = decoder_scores(out.decoder, test.samples);

  MetricsRecord score;
  score.dataset = options.dataset;
  score.subject = options.subject;
  score.session = options.session;
  score.fold = fold_index;
  score.theta = out.tuning.theta;
  score.blocks = out.tuning.blocks;
  score.metric = metric_name(kind);
  score.value = score_metric(scores, test.labels, kind);
  out.records.push_back(score);

  const std::vector<double> trajectory = out.decoder.bttda.nmse_trajectory();
  for (std::size_t b = 0; b < trajectory.size(); ++b) {
    MetricsRecord r = score;
    r.blocks = b + 1;
    r.metric = "nmse";
    r.value = trajectory[b];
    out.records.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsRecord> run_evaluation(const LabeledDataset& data, const EvaluationOptions& options) {
  data.validate();
  const std::vector<Fold> folds = stratified_kfold(data.labels, options.outer_folds, options.seed);
  std::vector<std::vector<MetricsRecord>> per_fold(folds.size());
  // Parallelism goes to the outer folds; each fold then tunes serially.
  EvaluationOptions inner = options;
  inner.threads = 1;
  parallel_for(folds.size(), options.threads, [&](std::size_t f) {
    per_fold[f] = evaluate_fold(data, folds[f], f, inner).records;
  });
  std::vector<MetricsRecord> records;
  for (auto& rows : per_fold) records.insert(records.end(), rows.begin(), rows.end());
  return records;
}

}  // namespace tdk
