#pragma once

#include <algorithm>
#include <utility>
#include <vector>

namespace gpner {

// Valid score cells for one sentence: the upper triangle 0 <= i <= j <
// true_length, optionally capped at a maximum span length. Cells outside
// the mask never reach the loss or the decoder.
struct Mask {
  int n = 0;             // padded length of the score matrices
  int true_length = 0;   // unpadded sentence length
  int max_span_len = 0;  // 0 = unlimited

  bool at(int i, int j) const {
    return i >= 0 && i <= j && j < true_length &&
           (max_span_len <= 0 || j - i + 1 <= max_span_len);
  }

  std::vector<std::pair<int, int>> cells() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < true_length; ++i) {
      for (int j = i; j < true_length; ++j) {
        if (max_span_len > 0 && j - i + 1 > max_span_len) break;
        out.emplace_back(i, j);
      }
    }
    return out;
  }

  long long cell_count() const {
    long long c = 0;
    for (int i = 0; i < true_length; ++i) {
      const int width = true_length - i;
      c += (max_span_len > 0) ? std::min(max_span_len, width) : width;
    }
    return c;
  }
};

}  // namespace gpner
