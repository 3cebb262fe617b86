#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "gpner/mask.hpp"
#include "gpner/span.hpp"

namespace gpner {

class Vocab;  // encoder.hpp

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::set<SpanAnnotation> annotations;

  int length() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
  std::vector<Sentence> sentences;

  int size() const { return static_cast<int>(sentences.size()); }
  // Sorted union of annotation types across all sentences.
  std::vector<std::string> entity_types() const;
  long long token_count() const;
  long long annotation_count() const;
};

// Non-fatal conditions noticed while reading a corpus.
struct IoWarnings {
  int duplicate_spans = 0;    // identical (start,end,type) listed twice
  int repaired_orphans = 0;   // I- tag without a matching open (lenient mode)
};

// One JSON object per line: {"id": ..., "tokens": [...], "entities":
// [{"start":s,"end":e,"type":t}, ...]}. "id" and "entities" are optional;
// missing ids become "s<index>". Blank lines and lines starting with '#'
// are skipped. Spans use inclusive ends and must satisfy
// 0 <= start <= end < len(tokens).
Corpus read_jsonl(const std::string& path, IoWarnings* warnings = nullptr);
Corpus read_jsonl(std::istream& in, const std::string& origin,
                  IoWarnings* warnings = nullptr);
void write_jsonl(const Corpus& corpus, const std::string& path);
void write_jsonl(const Corpus& corpus, std::ostream& out);

enum class BioPolicy {
  lenient,  // repair orphan I- tags by opening a new span (counted)
  strict,   // reject orphan I- tags
};

// Two whitespace-separated columns per line (token, BIO tag); blank line
// ends a sentence. Sentences get ids "s<index>".
Corpus read_conll_bio(const std::string& path, BioPolicy policy = BioPolicy::lenient,
                      IoWarnings* warnings = nullptr);
Corpus read_conll_bio(std::istream& in, const std::string& origin,
                      BioPolicy policy = BioPolicy::lenient,
                      IoWarnings* warnings = nullptr);
// Fails with a message naming the offending spans if any overlap (BIO
// cannot represent overlapping or nested mentions).
void write_conll_bio(const Corpus& corpus, const std::string& path);
void write_conll_bio(const Corpus& corpus, std::ostream& out);

// Tag sequence -> span set. Round-trips exactly with spans_to_bio for any
// non-overlapping span set.
std::set<SpanAnnotation> bio_to_spans(const std::vector<std::string>& tags,
                                      BioPolicy policy = BioPolicy::lenient,
                                      int* repaired = nullptr);
std::vector<std::string> spans_to_bio(const std::set<SpanAnnotation>& spans,
                                      int n_tokens);

// A padded minibatch. Row b of token_ids holds sentence b's ids padded to
// max_n with the vocabulary's PAD id.
struct Batch {
  std::vector<std::vector<int>> token_ids;
  std::vector<const Sentence*> sentences;
  std::vector<Mask> masks;
  int max_n = 0;
};

// Shuffle sentence order with the given seed (same seed => same batches),
// then cut into chunks of batch_size.
std::vector<Batch> make_batches(const Corpus& corpus, const Vocab& vocab,
                                int batch_size, unsigned long long seed,
                                int max_span_len = 0);

// Deterministic synthetic corpus over a trigger-word grammar: every entity
// of type Tk starts with token "open<k>" and ends with token "close<k>",
// so the annotation is exactly recoverable from the surface string and a
// small model can reach perfect F1. With nested=true roughly 30% of
// sentences contain an entity of a different type strictly inside another.
Corpus synth_corpus(unsigned long long seed, int n_sentences, int type_count,
                    bool nested);

}  // namespace gpner
