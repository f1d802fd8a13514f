#pragma once

#include <string>
#include <vector>

#include "advkit/model.hpp"
#include "advkit/tensor.hpp"

namespace advkit {

struct Sample {
  std::string name;
  Tensor image;
  Label label;
};

// In-memory labeled image set; class ids are dense 0..n_v-1 and
// class_names is sorted lexicographically at load time.
struct Dataset {
  Task task = Task::kClassification;
  std::vector<std::string> class_names;
  std::vector<Sample> samples;

  int num_classes() const { return static_cast<int>(class_names.size()); }
};

}  // namespace advkit
