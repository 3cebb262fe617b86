#include "gpner/decoder.hpp"

#include <algorithm>
#include <tuple>

#include "gpner/error.hpp"

namespace gpner {

std::string decode_mode_name(DecodeMode m) {
  return m == DecodeMode::nested ? "nested" : "flat";
}

DecodeMode decode_mode_from(const std::string& name) {
  if (name == "nested") return DecodeMode::nested;
  if (name == "flat") return DecodeMode::flat;
  throw ValidationError("unknown decode mode \"" + name +
                        "\" (expected \"nested\" or \"flat\")");
}

namespace {

struct Candidate {
  int start, end, type;
  double score;
};

std::vector<Candidate> candidates_above(const ScoreTensor& tensor,
                                        const EntityTypeSet& types,
                                        double threshold) {
  if (static_cast<int>(tensor.scores.size()) != types.size()) {
    throw DimError("score tensor has " +
                   std::to_string(tensor.scores.size()) +
                   " type planes but the type set has " +
                   std::to_string(types.size()));
  }
  std::vector<Candidate> out;
  const auto cells = tensor.mask.cells();
  for (int t = 0; t < types.size(); ++t) {
    const Matrix& plane = tensor.scores[t];
    for (const auto& [i, j] : cells) {
      const double s = plane.at(i, j);
      if (s > threshold) out.push_back({i, j, t, s});
    }
  }
  return out;
}

}  // namespace

std::vector<ScoredSpan> decode_spans(const ScoreTensor& tensor,
                                     const EntityTypeSet& types,
                                     double threshold, DecodeMode mode) {
  std::vector<Candidate> cands = candidates_above(tensor, types, threshold);

  std::vector<Candidate> kept;
  if (mode == DecodeMode::nested) {
    kept = std::move(cands);
  } else {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                             const Candidate& b) {
      return std::tie(b.score, a.start, a.end, a.type) <
             std::tie(a.score, b.start, b.end, b.type);
    });
    for (const auto& c : cands) {
      bool clashes = false;
      for (const auto& k : kept) {
        if (c.start <= k.end && k.start <= c.end) {
          clashes = true;
          break;
        }
      }
      if (!clashes) kept.push_back(c);
    }
  }

  std::sort(kept.begin(), kept.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tie(a.start, a.end, a.type) <
                     std::tie(b.start, b.end, b.type);
            });

  std::vector<ScoredSpan> out;
  out.reserve(kept.size());
  for (const auto& c : kept) {
    out.push_back({SpanAnnotation{c.start, c.end, types.name(c.type)}, c.score});
  }
  return out;
}

}  // namespace gpner
