#include "gpner/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "gpner/error.hpp"

namespace gpner {

double PRF::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
}

double PRF::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
}

double PRF::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

SpanSets span_sets(const Corpus& corpus) {
  SpanSets out;
  for (const auto& s : corpus.sentences) out[s.id] = s.annotations;
  return out;
}

SpanSets span_sets(const std::vector<Prediction>& predictions) {
  SpanSets out;
  for (const auto& p : predictions) {
    auto& set = out[p.id];
    for (const auto& s : p.spans) set.insert(s.span);
  }
  return out;
}

namespace {

void check_same_ids(const SpanSets& gold, const SpanSets& pred) {
  for (const auto& [id, spans] : gold) {
    (void)spans;
    if (!pred.count(id)) {
      throw ValidationError("sentence \"" + id +
                            "\" is in the gold set but not the predictions");
    }
  }
  for (const auto& [id, spans] : pred) {
    (void)spans;
    if (!gold.count(id)) {
      throw ValidationError("sentence \"" + id +
                            "\" is in the predictions but not the gold set");
    }
  }
}

}  // namespace

EvalReport strict_f1(const SpanSets& gold, const SpanSets& pred) {
  check_same_ids(gold, pred);

  std::map<std::string, PRF> by_type;
  for (const auto& [id, gold_spans] : gold) {
    const auto& pred_spans = pred.at(id);
    for (const auto& s : pred_spans) {
      if (gold_spans.count(s)) {
        ++by_type[s.type].tp;
      } else {
        ++by_type[s.type].fp;
      }
    }
    for (const auto& s : gold_spans) {
      if (!pred_spans.count(s)) ++by_type[s.type].fn;
    }
  }

  EvalReport report;
  double f1_sum = 0.0;
  for (const auto& [type, counts] : by_type) {
    report.micro.add(counts);
    report.per_type.emplace_back(type, counts);
    f1_sum += counts.f1();
  }
  if (!report.per_type.empty()) {
    f1_sum /= static_cast<double>(report.per_type.size());
  }
  report.macro_f1 = f1_sum;
  return report;
}

std::string bucket_axis_name(BucketAxis a) {
  switch (a) {
    case BucketAxis::sentence_length: return "sentence_length";
    case BucketAxis::entity_length: return "entity_length";
    case BucketAxis::density: return "density";
  }
  return "?";
}

BucketAxis bucket_axis_from(const std::string& name) {
  if (name == "sentence_length") return BucketAxis::sentence_length;
  if (name == "entity_length") return BucketAxis::entity_length;
  if (name == "density") return BucketAxis::density;
  throw ValidationError("unknown bucket axis \"" + name +
                        "\" (expected sentence_length, entity_length or "
                        "density)");
}

namespace {

int length_bucket(int len) { return len < 3 ? 0 : (len < 6 ? 1 : 2); }
int density_bucket(double d) { return d <= 0.1 ? 0 : (d <= 0.3 ? 1 : 2); }

double gold_density(const Sentence& s) {
  if (s.length() == 0) return 0.0;
  std::vector<char> covered(s.tokens.size(), 0);
  for (const auto& a : s.annotations) {
    for (int i = a.start; i <= a.end; ++i) covered[i] = 1;
  }
  int n = 0;
  for (char c : covered) n += c;
  return static_cast<double>(n) / s.length();
}

const char* kLengthRanges[3] = {"len < 3", "3 <= len < 6", "len >= 6"};
const char* kDensityRanges[3] = {"d <= 0.1", "0.1 < d <= 0.3", "d > 0.3"};

}  // namespace

BucketReport bucket_report(const Corpus& gold, const SpanSets& pred,
                           BucketAxis axis) {
  const SpanSets gold_sets = span_sets(gold);
  check_same_ids(gold_sets, pred);

  SpanSets gold_b[3], pred_b[3];
  if (axis == BucketAxis::entity_length) {
    // every id appears in every bucket; spans go to their length's bucket
    for (const auto& [id, spans] : gold_sets) {
      for (int b = 0; b < 3; ++b) {
        gold_b[b][id];
        pred_b[b][id];
      }
      for (const auto& s : spans) gold_b[length_bucket(s.length())][id].insert(s);
    }
    for (const auto& [id, spans] : pred) {
      for (const auto& s : spans) pred_b[length_bucket(s.length())][id].insert(s);
    }
  } else {
    for (const auto& sent : gold.sentences) {
      const int b = axis == BucketAxis::sentence_length
                        ? length_bucket(sent.length())
                        : density_bucket(gold_density(sent));
      gold_b[b][sent.id] = gold_sets.at(sent.id);
      pred_b[b][sent.id] = pred.at(sent.id);
    }
  }

  BucketReport out;
  out.axis = axis;
  const bool density = axis == BucketAxis::density;
  const char* names[3] = {density ? "D1" : "L1", density ? "D2" : "L2",
                          density ? "D3" : "L3"};
  for (int b = 0; b < 3; ++b) {
    out.buckets.push_back(Bucket{
        names[b], density ? kDensityRanges[b] : kLengthRanges[b],
        strict_f1(gold_b[b], pred_b[b])});
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

void counts_row(std::ostringstream& os, const std::string& label, int width,
                const PRF& prf) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s %6lld %6lld %6lld  %6s  %6s  %6s%s\n",
                width, label.c_str(), prf.tp, prf.fp, prf.fn,
                fmt(prf.precision()).c_str(), fmt(prf.recall()).c_str(),
                fmt(prf.f1()).c_str(), prf.undefined() ? " *" : "");
  os << buf;
}

void table_header(std::ostringstream& os, const std::string& label, int width) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s %6s %6s %6s  %6s  %6s  %6s\n", width,
                label.c_str(), "tp", "fp", "fn", "prec", "rec", "f1");
  os << buf;
}

}  // namespace

std::string report_table(const EvalReport& report) {
  int width = 7;  // fits "(micro)"
  for (const auto& [type, prf] : report.per_type) {
    (void)prf;
    width = std::max(width, static_cast<int>(type.size()));
  }

  std::ostringstream os;
  table_header(os, "type", width);
  bool flagged = report.micro.undefined();
  for (const auto& [type, prf] : report.per_type) {
    counts_row(os, type, width, prf);
    flagged = flagged || prf.undefined();
  }
  counts_row(os, "(micro)", width, report.micro);
  os << "macro-F1 " << fmt(report.macro_f1) << "\n";
  if (flagged) os << "* 0/0 ratio reported as 0\n";
  return os.str();
}

std::string bucket_table(const BucketReport& report) {
  int width = 4;
  for (const auto& b : report.buckets) {
    width = std::max(width,
                     static_cast<int>(b.name.size() + b.range.size()) + 3);
  }

  std::ostringstream os;
  os << "axis: " << bucket_axis_name(report.axis) << "\n";
  table_header(os, "bucket", width);
  bool flagged = false;
  for (const auto& b : report.buckets) {
    counts_row(os, b.name + " (" + b.range + ")", width, b.report.micro);
    flagged = flagged || b.report.micro.undefined();
  }
  if (flagged) os << "* 0/0 ratio reported as 0\n";
  return os.str();
}

namespace {

void kv_counts(std::ostream& out, const std::string& prefix, const PRF& prf) {
  out << prefix << ".tp = " << prf.tp << "\n";
  out << prefix << ".fp = " << prf.fp << "\n";
  out << prefix << ".fn = " << prf.fn << "\n";
  out << prefix << ".p = " << fmt(prf.precision()) << "\n";
  out << prefix << ".r = " << fmt(prf.recall()) << "\n";
  out << prefix << ".f1 = " << fmt(prf.f1()) << "\n";
  out << prefix << ".undef = " << (prf.undefined() ? 1 : 0) << "\n";
}

}  // namespace

void write_report_kv(std::ostream& out, const EvalReport& report,
                     const std::vector<BucketReport>& buckets,
                     const std::vector<std::pair<std::string, std::string>>&
                         config_echo) {
  for (const auto& [k, v] : config_echo) {
    out << "config." << k << " = " << v << "\n";
  }
  kv_counts(out, "micro", report.micro);
  out << "macro.f1 = " << fmt(report.macro_f1) << "\n";
  for (const auto& [type, prf] : report.per_type) {
    kv_counts(out, "per_type." + type, prf);
  }
  for (const auto& br : buckets) {
    for (const auto& b : br.buckets) {
      kv_counts(out, "bucket." + bucket_axis_name(br.axis) + "." + b.name, b.report.micro);
    }
  }
}

}  // namespace gpner
