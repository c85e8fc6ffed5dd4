#include <algorithm>
#include <stdexcept>
#include <string>

#include "tdk/evaluation.hpp"
#include "tdk/rng.hpp"

namespace tdk {

std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: need at least two folds");
  const std::size_t classes = class_count_of(labels);
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() < k) {
      throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) + " has " +
                                  std::to_string(members[c].size()) + " samples, fewer than " +
                                  std::to_string(k) + " folds");
    }
  }

  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    CounterRng rng(seed, {0xF01D, c});
    shuffle(members[c].begin(), members[c].end(), rng);
    for (std::size_t idx : members[c]) {
      folds[next].test.push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (Fold& f : folds) {
    std::sort(f.test.begin(), f.test.end());
    std::size_t t = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (t < f.test.size() && f.test[t] == i) {
        ++t;
      } else {
        f.train.push_back(i);
      }
    }
  }
  return folds;
}

std::uint64_t inner_seed(std::uint64_t seed, std::size_t fold) { return CounterRng(seed, {0x1AAE, fold})(); }

}  // namespace tdk
