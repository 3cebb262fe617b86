#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gpner/data.hpp"
#include "gpner/decoder.hpp"
#include "gpner/span.hpp"

namespace gpner {

// Confusion counts with derived ratios. 0/0 ratios come back as 0; the
// undefined() flag says when that happened.
struct PRF {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  bool undefined() const { return tp + fp == 0 || tp + fn == 0; }

  void add(const PRF& o) { tp += o.tp; fp += o.fp; fn += o.fn; }
};

struct EvalReport {
  PRF micro;
  double macro_f1 = 0.0;
  // sorted by type name; only types with gold-or-pred support appear
  std::vector<std::pair<std::string, PRF>> per_type;
};

// Per-sentence gold or predicted span sets, keyed by sentence id.
using SpanSets = std::map<std::string, std::set<SpanAnnotation>>;

SpanSets span_sets(const Corpus& corpus);
SpanSets span_sets(const std::vector<Prediction>& predictions);

// Strict span matching: a predicted span counts as a true positive only
// when the identical (start, end, type) triple is in that sentence's gold
// set. Macro-F1 averages per-type F1 over the types that appear in gold or
// pred; types absent from both contribute nothing.
EvalReport strict_f1(const SpanSets& gold, const SpanSets& pred);

enum class BucketAxis { sentence_length, entity_length, density };

std::string bucket_axis_name(BucketAxis a);
BucketAxis bucket_axis_from(const std::string& name);  // throws on unknown axis

struct Bucket {
  std::string name;   // L1/L2/L3 or D1/D2/D3
  std::string range;  // human-readable bound description
  EvalReport report;
};

struct BucketReport {
  BucketAxis axis;
  std::vector<Bucket> buckets;
};

// sentence_length: sentences grouped by token count (<3, 3..5, >=6).
// entity_length: every gold/pred span scored in the group of its own
// length, so confusion counts are conserved exactly across groups.
// density: sentences grouped by the fraction of tokens covered by at
// least one gold entity (<=0.1, (0.1,0.3], >0.3); overlapping entities
// count covered tokens once.
BucketReport bucket_report(const Corpus& gold, const SpanSets& pred,
                           BucketAxis axis);

// Human-readable tables.
std::string report_table(const EvalReport& report);
std::string bucket_table(const BucketReport& report);

// Machine-readable lines, one "key = value" per line. config_echo pairs
// are emitted first as "config.<key> = <value>".
void write_report_kv(std::ostream& out, const EvalReport& report,
                     const std::vector<BucketReport>& buckets,
                     const std::vector<std::pair<std::string, std::string>>&
                         config_echo);

}  // namespace gpner
