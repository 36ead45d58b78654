#pragma once

#include <map>
#include <vector>

#include "crowdsel/selection.hpp"
#include "crowdsel/types.hpp"

namespace fixture {

// Dataset of `count` workers with the given histories (D = h[0].size()).
inline crowdsel::Dataset dataset(const std::vector<std::vector<double>>& h, int tasks = 20) {
  crowdsel::Dataset ds;
  ds.domains = h.empty() ? 0 : static_cast<int>(h.front().size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    crowdsel::WorkerProfile p;
    p.id = static_cast<int>(i);
    p.h = h[i];
    p.n.assign(h[i].size(), tasks);
    ds.workers.push_back(p);
  }
  return ds;
}

// Every worker answers with a fixed correctness pattern: always right when
// its accuracy is >= 0.5, otherwise always wrong. Ground truth alternates.
class FixedOracle final : public crowdsel::AnswerOracle {
 public:
  explicit FixedOracle(std::vector<double> accuracy) : accuracy_(std::move(accuracy)) {}

  crowdsel::AnswerBatch serve(crowdsel::WorkerId worker, int round, int count) override {
    crowdsel::AnswerBatch b;
    b.worker_id = worker;
    for (int j = 0; j < count; ++j) {
      const std::uint8_t truth = static_cast<std::uint8_t>((j + round) % 2);
      b.ground_truth.push_back(truth);
      const bool right = accuracy_[static_cast<std::size_t>(worker)] >= 0.5;
      b.given.push_back(right ? truth : static_cast<std::uint8_t>(1 - truth));
    }
    served[round] += count;
    return b;
  }

  std::map<int, long long> served;

 private:
  std::vector<double> accuracy_;
};

// Worker i answers the first `correct[i]` tasks of every batch correctly.
class CountOracle final : public crowdsel::AnswerOracle {
 public:
  explicit CountOracle(std::vector<int> correct) : correct_(std::move(correct)) {}

  crowdsel::AnswerBatch serve(crowdsel::WorkerId worker, int, int count) override {
    crowdsel::AnswerBatch b;
    b.worker_id = worker;
    for (int j = 0; j < count; ++j) {
      b.ground_truth.push_back(1);
      b.given.push_back(j < correct_[static_cast<std::size_t>(worker)] ? 1 : 0);
    }
    return b;
  }

 private:
  std::vector<int> correct_;
};

}  // namespace fixture
