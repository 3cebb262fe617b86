#pragma once

#include <string>
#include <tuple>

namespace gpner {

// A labeled token span. Both indices are inclusive: (start, end, type)
// covers tokens start..end. This convention holds everywhere in the
// toolkit, including the JSONL format.
struct SpanAnnotation {
  int start = 0;
  int end = 0;
  std::string type;

  SpanAnnotation() = default;
  SpanAnnotation(int s, int e, std::string t)
      : start(s), end(e), type(std::move(t)) {}

  int length() const { return end - start + 1; }

  bool overlaps(const SpanAnnotation& o) const {
    return start <= o.end && o.start <= end;
  }

  bool operator==(const SpanAnnotation& o) const {
    return start == o.start && end == o.end && type == o.type;
  }
  bool operator<(const SpanAnnotation& o) const {
    return std::tie(start, end, type) < std::tie(o.start, o.end, o.type);
  }

  std::string str() const {
    return "(" + std::to_string(start) + "," + std::to_string(end) + "," +
           type + ")";
  }
};

}  // namespace gpner
