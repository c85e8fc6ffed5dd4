// Command-line front end: synth, fit, predict, evaluate, gridsearch.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdk/evaluation.hpp"
#include "tdk/io.hpp"
#include "tdk/synthetic.hpp"

namespace {

std::vector<double> parse_thetas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("--theta", "no values given");
  return out;
}

tdk::Dims parse_dims(const std::string& text) {
  tdk::Dims out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<std::size_t>(std::stoul(item)));
  return out;
}

// Writes to the named file, or stdout for "-" / empty.
template <typename Fn>
void with_output(const std::string& path, Fn fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor discriminant analysis toolkit (HODA / BTTDA / PARAFACDA)"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  std::string synth_dims = "8,16";
  std::size_t per_class = 100;
  std::size_t effects = 2;
  double amplitude = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::string out_path;
  synth->add_option("--dims", synth_dims, "Comma-separated tensor dimensions")->capture_default_str();
  synth->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
  synth->add_option("--effects", effects, "Planted rank-1 effects in class 1")->capture_default_str();
  synth->add_option("--amplitude", amplitude, "Effect amplitude")->capture_default_str();
  synth->add_option("--sigma", sigma, "Noise scale")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out_path, "Output dataset file")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a BTTDA+LDA decoder and write the model file");
  std::string data_path;
  double theta = 0.0;
  std::size_t blocks = 1;
  fit->add_option("--data", data_path, "Training dataset")->required();
  fit->add_option("--theta", theta, "Block-rank hyperparameter in [0, 1]")->capture_default_str();
  fit->add_option("--blocks", blocks, "Number of blocks")->capture_default_str();
  fit->add_option("--seed", seed, "Seed for random initialization")->capture_default_str();
  fit->add_option("--out", out_path, "Output model file")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Score samples with a fitted model");
  std::string model_path;
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--data", data_path, "Dataset to score")->required();
  predict->add_option("--out", out_path, "Output CSV (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Nested cross-validated evaluation");
  std::string theta_list = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::size_t folds = 5;
  std::size_t inner_folds = 5;
  std::size_t threads = 1;
  std::string dataset_tag = "synthetic";
  std::string subject;
  std::string session;
  blocks = 16;
  evaluate->add_option("--data", data_path, "Dataset")->required();
  evaluate->add_option("--theta", theta_list, "Comma-separated theta grid")->capture_default_str();
  evaluate->add_option("--blocks", blocks, "Largest block count in the grid")->capture_default_str();
  evaluate->add_option("--folds", folds, "Outer folds")->capture_default_str();
  evaluate->add_option("--inner-folds", inner_folds, "Inner tuning folds")->capture_default_str();
  evaluate->add_option("--seed", seed, "Seed for fold assignment")->capture_default_str();
  evaluate->add_option("--threads", threads, "Worker threads over outer folds")->capture_default_str();
  evaluate->add_option("--dataset", dataset_tag, "Dataset tag for the CSV")->capture_default_str();
  evaluate->add_option("--subject", subject, "Subject tag for the CSV");
  evaluate->add_option("--session", session, "Session tag for the CSV");
  evaluate->add_option("--out", out_path, "Metrics CSV (default stdout)");

  // gridsearch
  auto* grid = app.add_subcommand("gridsearch", "Report the inner-CV tuning table");
  grid->add_option("--data", data_path, "Dataset")->required();
  grid->add_option("--theta", theta_list, "Comma-separated theta grid")->capture_default_str();
  grid->add_option("--blocks", blocks, "Largest block count in the grid")->capture_default_str();
  grid->add_option("--folds", inner_folds, "Tuning folds")->capture_default_str();
  grid->add_option("--seed", seed, "Seed for fold assignment")->capture_default_str();
  grid->add_option("--threads", threads, "Worker threads")->capture_default_str();
  grid->add_option("--out", out_path, "Report CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const tdk::LabeledDataset data =
          tdk::generate_synthetic(tdk::planted_config(parse_dims(synth_dims), per_class, effects, amplitude, sigma, seed));
      tdk::save_dataset(out_path, data);
      std::cerr << "wrote " << data.size() << " samples to " << out_path << '\n';
    } else if (*fit) {
      const tdk::LabeledDataset data = tdk::load_dataset(data_path);
      tdk::DecoderConfig config;
      config.theta = theta;
      config.blocks = blocks;
      config.fit.seed = seed;
      const tdk::Decoder decoder = tdk::fit_decoder(data, config);
      if (decoder.bttda.truncated_to_single_block) {
        std::cerr << "warning: theta = 1 admits a single full-rank block; fitted 1 block\n";
      }
      tdk::save_decoder(out_path, decoder);
      std::cerr << "fitted " << decoder.bttda.blocks.size() << " block(s), " << decoder.bttda.feature_count()
                << " features, " << decoder.head.mask.kept() << " selected\n";
    } else if (*predict) {
      const tdk::Decoder decoder = tdk::load_decoder(model_path);
      const tdk::LabeledDataset data = tdk::load_dataset(data_path);
      const tdk::Matrix scores = tdk::decoder_scores(decoder, data.samples);
      const std::vector<int> predicted = tdk::predict_labels(scores);
      with_output(out_path, [&](std::ostream& out) {
        out << "index,label,predicted";
        for (Eigen::Index c = 0; c < scores.cols(); ++c) out << ",score_" << c;
        out << '\n';
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          out << i << ',' << data.labels[static_cast<std::size_t>(i)] << ',' << predicted[static_cast<std::size_t>(i)];
          for (Eigen::Index c = 0; c < scores.cols(); ++c) out << ',' << tdk::format_double(scores(i, c));
          out << '\n';
        }
      });
      const tdk::MetricKind kind = tdk::default_metric(static_cast<std::size_t>(scores.cols()));
      if (data.class_count() == static_cast<std::size_t>(scores.cols())) {
        std::cerr << tdk::metric_name(kind) << " = " << tdk::score_metric(scores, data.labels, kind) << '\n';
      }
    } else if (*evaluate) {
      const tdk::LabeledDataset data = tdk::load_dataset(data_path);
      tdk::EvaluationOptions options;
      options.outer_folds = folds;
      options.inner_folds = inner_folds;
      options.grid.thetas = parse_thetas(theta_list);
      options.grid.max_blocks = blocks;
      options.seed = seed;
      options.threads = threads;
      options.dataset = dataset_tag;
      options.subject = subject;
      options.session = session;
      const auto records = tdk::run_evaluation(data, options);
      with_output(out_path, [&](std::ostream& out) { tdk::write_metrics_csv(out, records); });
    } else if (*grid) {
      const tdk::LabeledDataset data = tdk::load_dataset(data_path);
      tdk::SearchGrid search;
      search.thetas = parse_thetas(theta_list);
      search.max_blocks = blocks;
      const tdk::TuningResult result = tdk::tune_hyperparameters(data, search, inner_folds, seed, {}, threads);
      with_output(out_path, [&](std::ostream& out) {
        out << "theta,blocks,mean_score,selected\n";
        for (const auto& row : result.table) {
          const bool chosen = row.theta == result.theta && row.blocks == result.blocks;
          out << tdk::format_double(row.theta) << ',' << row.blocks << ',' << tdk::format_double(row.mean_score)
              << ',' << (chosen ? 1 : 0) << '\n';
        }
      });
      std::cerr << "selected theta=" << result.theta << " blocks=" << result.blocks << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
