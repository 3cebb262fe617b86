#pragma once

#include <string>
#include <vector>

#include "gpner/heads.hpp"
#include "gpner/span.hpp"

namespace gpner {

struct ScoredSpan {
  SpanAnnotation span;
  double score = 0.0;
};

// nested: emit every span scoring above the threshold, overlaps included.
// flat: greedy non-overlapping selection, strongest candidates first.
enum class DecodeMode { nested, flat };

std::string decode_mode_name(DecodeMode m);
DecodeMode decode_mode_from(const std::string& name);  // throws on unknown mode

// Turn one sentence's score tensor into spans. Only cells inside the mask
// are considered; a span is a candidate when its score is strictly above
// the threshold. Results come back ordered by (start, end, type).
//
// Flat ties are broken deterministically: candidates are ranked by
// descending score, then start, then end, then type index.
std::vector<ScoredSpan> decode_spans(const ScoreTensor& tensor,
                                     const EntityTypeSet& types,
                                     double threshold, DecodeMode mode);

// Decoded output for one sentence, paired with its id.
struct Prediction {
  std::string id;
  std::vector<ScoredSpan> spans;
};

}  // namespace gpner
