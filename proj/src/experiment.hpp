#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "data.hpp"
#include "network_spec.hpp"
#include "train.hpp"

namespace fckan {

// Everything one CLI invocation needs. Text form is the union of the network
// spec keys, the training keys and the fields below.
struct ExperimentConfig {
  NetworkSpec spec;
  TrainingConfig training;
  DatasetKind dataset = DatasetKind::kMnist;
  double fraction = 1.0;  // stratified training subset; validation stays whole
  std::string precision = "f32";
  std::string out_dir = "runs";
  std::size_t jobs = 1;

  // Later lines override earlier ones, so "file text + flag lines" gives
  // flags precedence over the file. Unknown keys are rejected.
  static ExperimentConfig parse(std::string_view text);
  void validate() const;
  std::string to_text() const;
  std::string hash() const;
};

}  // namespace fckan
