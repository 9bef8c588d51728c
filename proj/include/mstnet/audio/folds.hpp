#pragma once

#include <stdexcept>
#include <vector>

#include "mstnet/audio/wav.hpp"

namespace mstnet::audio {

struct FoldAssignment {
  std::vector<int> train_folds;  // the 3 folds not used for validation/test
  int validation_fold = 0;
  int test_fold = 0;
};

inline FoldAssignment make_fold_assignment(int test_fold, int validation_fold) {
  if (test_fold < 1 || test_fold > 5 || validation_fold < 1 || validation_fold > 5)
    throw std::invalid_argument("folds must be in 1..5");
  if (test_fold == validation_fold)
    throw std::invalid_argument("test fold equals validation fold");
  FoldAssignment fa;
  fa.test_fold = test_fold;
  fa.validation_fold = validation_fold;
  for (int f = 1; f <= 5; ++f)
    if (f != test_fold && f != validation_fold) fa.train_folds.push_back(f);
  return fa;
}

struct FoldSplit {
  std::vector<AudioClip> train, validation, test;
};

inline FoldSplit assign_folds(const std::vector<AudioClip>& clips, int test_fold,
                              int validation_fold) {
  const auto fa = make_fold_assignment(test_fold, validation_fold);
  FoldSplit split;
  for (const auto& c : clips) {
    if (c.fold == fa.test_fold)
      split.test.push_back(c);
    else if (c.fold == fa.validation_fold)
      split.validation.push_back(c);
    else
      split.train.push_back(c);
  }
  return split;
}

}  // namespace mstnet::audio
