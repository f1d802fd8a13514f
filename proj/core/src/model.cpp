#include "advkit/model.hpp"

namespace advkit {

int argmax_class(const Tensor& logits) {
  int best = 0;
  for (size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  return best;
}

std::vector<int> argmax_map(const Tensor& logit_map) {
  std::vector<int> out(static_cast<size_t>(logit_map.height()) * logit_map.width());
  for (int r = 0; r < logit_map.height(); ++r)
    for (int c = 0; c < logit_map.width(); ++c) {
      int best = 0;
      for (int k = 1; k < logit_map.channels(); ++k)
        if (logit_map.at(r, c, k) > logit_map.at(r, c, best)) best = k;
      out[static_cast<size_t>(r) * logit_map.width() + c] = best;
    }
  return out;
}

}  // namespace advkit
