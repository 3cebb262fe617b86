#include "gpner/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "gpner/encoder.hpp"
#include "gpner/error.hpp"
#include "gpner/rng.hpp"

namespace gpner {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string where(const std::string& origin, int line_no) {
  return origin + " line " + std::to_string(line_no) + ": ";
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

void check_span_range(const SpanAnnotation& s, int n, const std::string& sid) {
  if (s.start < 0 || s.end < s.start || s.end >= n) {
    throw ValidationError("sentence " + sid + ": span " + s.str() +
                          " out of range for " + std::to_string(n) +
                          " token(s)");
  }
  if (s.type.empty()) {
    throw ValidationError("sentence " + sid + ": span with empty type");
  }
}

void check_unique_id(std::unordered_set<std::string>& seen,
                     const std::string& id, const std::string& origin) {
  if (!seen.insert(id).second) {
    throw ValidationError(origin + ": duplicate sentence id \"" + id + "\"");
  }
}

}  // namespace

std::vector<std::string> Corpus::entity_types() const {
  std::set<std::string> types;
  for (const auto& s : sentences) {
    for (const auto& a : s.annotations) types.insert(a.type);
  }
  return {types.begin(), types.end()};
}

long long Corpus::token_count() const {
  long long n = 0;
  for (const auto& s : sentences) n += s.length();
  return n;
}

long long Corpus::annotation_count() const {
  long long n = 0;
  for (const auto& s : sentences) n += static_cast<long long>(s.annotations.size());
  return n;
}

Corpus read_jsonl(const std::string& path, IoWarnings* warnings) {
  auto in = open_or_throw(path);
  return read_jsonl(in, path, warnings);
}

Corpus read_jsonl(std::istream& in, const std::string& origin,
                  IoWarnings* warnings) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  int index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where(origin, line_no) + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError(where(origin, line_no) + "expected a JSON object");
    }

    Sentence sent;
    if (obj.contains("id")) {
      if (!obj["id"].is_string()) {
        throw ParseError(where(origin, line_no) + "\"id\" must be a string");
      }
      sent.id = obj["id"].get<std::string>();
    } else {
      sent.id = "s" + std::to_string(index);
    }
    if (sent.id.empty()) {
      throw ParseError(where(origin, line_no) + "\"id\" must be non-empty");
    }

    if (!obj.contains("tokens") || !obj["tokens"].is_array()) {
      throw ParseError(where(origin, line_no) +
                       "\"tokens\" must be an array of strings");
    }
    for (const auto& t : obj["tokens"]) {
      if (!t.is_string()) {
        throw ParseError(where(origin, line_no) +
                         "\"tokens\" must be an array of strings");
      }
      sent.tokens.push_back(t.get<std::string>());
    }

    if (obj.contains("entities")) {
      if (!obj["entities"].is_array()) {
        throw ParseError(where(origin, line_no) + "\"entities\" must be an array");
      }
      for (const auto& e : obj["entities"]) {
        if (!e.is_object() || !e.contains("start") || !e.contains("end") ||
            !e.contains("type") || !e["start"].is_number_integer() ||
            !e["end"].is_number_integer() || !e["type"].is_string()) {
          throw ParseError(where(origin, line_no) +
                           "each entity needs integer \"start\"/\"end\" and "
                           "string \"type\"");
        }
        SpanAnnotation span{e["start"].get<int>(), e["end"].get<int>(),
                            e["type"].get<std::string>()};
        check_span_range(span, sent.length(), sent.id);
        if (!sent.annotations.insert(span).second && warnings) {
          ++warnings->duplicate_spans;
        }
      }
    }

    check_unique_id(seen_ids, sent.id, origin);
    corpus.sentences.push_back(std::move(sent));
    ++index;
  }
  return corpus;
}

void write_jsonl(const Corpus& corpus, const std::string& path) {
  auto out = create_or_throw(path);
  write_jsonl(corpus, out);
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences) {
    ordered_json obj;
    obj["id"] = s.id;
    obj["tokens"] = s.tokens;
    obj["entities"] = ordered_json::array();
    for (const auto& a : s.annotations) {
      obj["entities"].push_back(
          {{"start", a.start}, {"end", a.end}, {"type", a.type}});
    }
    out << obj.dump() << "\n";
  }
}

Corpus read_conll_bio(const std::string& path, BioPolicy policy,
                      IoWarnings* warnings) {
  auto in = open_or_throw(path);
  return read_conll_bio(in, path, policy, warnings);
}

Corpus read_conll_bio(std::istream& in, const std::string& origin,
                      BioPolicy policy, IoWarnings* warnings) {
  Corpus corpus;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  int first_line = 0;

  auto flush = [&](void) {
    if (tokens.empty()) return;
    Sentence sent;
    sent.id = "s" + std::to_string(corpus.size());
    sent.tokens = tokens;
    int repaired = 0;
    try {
      sent.annotations = bio_to_spans(tags, policy, &repaired);
    } catch (const ParseError& e) {
      throw ParseError(where(origin, first_line) + "sentence " + sent.id +
                       ": " + e.what());
    }
    if (warnings) warnings->repaired_orphans += repaired;
    corpus.sentences.push_back(std::move(sent));
    tokens.clear();
    tags.clear();
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Trim a trailing carriage return so CRLF files parse the same way.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    std::istringstream fields(line);
    std::string tok, tag, extra;
    if (!(fields >> tok >> tag) || (fields >> extra)) {
      throw ParseError(where(origin, line_no) +
                       "expected two columns (token and BIO tag)");
    }
    if (tokens.empty()) first_line = line_no;
    tokens.push_back(tok);
    tags.push_back(tag);
  }
  flush();
  return corpus;
}

void write_conll_bio(const Corpus& corpus, const std::string& path) {
  auto out = create_or_throw(path);
  write_conll_bio(corpus, out);
}

void write_conll_bio(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences) {
    std::vector<std::string> tags;
    try {
      tags = spans_to_bio(s.annotations, s.length());
    } catch (const ValidationError& e) {
      throw ValidationError("sentence " + s.id + ": " + e.what());
    }
    for (int i = 0; i < s.length(); ++i) {
      out << s.tokens[i] << " " << tags[i] << "\n";
    }
    out << "\n";
  }
}

std::set<SpanAnnotation> bio_to_spans(const std::vector<std::string>& tags,
                                      BioPolicy policy, int* repaired) {
  std::set<SpanAnnotation> spans;
  std::string open_type;
  int open_start = -1;

  auto close = [&](int end) {
    if (open_start >= 0) spans.insert({open_start, end, open_type});
    open_start = -1;
    open_type.clear();
  };

  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n; ++i) {
    const std::string& tag = tags[i];
    if (tag == "O") {
      close(i - 1);
    } else if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') &&
               tag[1] == '-') {
      const std::string type = tag.substr(2);
      if (tag[0] == 'B') {
        close(i - 1);
        open_start = i;
        open_type = type;
      } else if (open_start >= 0 && open_type == type) {
        // continue the current span
      } else {
        // I- tag with no matching open span
        if (policy == BioPolicy::strict) {
          throw ParseError("orphan tag " + tag + " at token " +
                           std::to_string(i));
        }
        close(i - 1);
        open_start = i;
        open_type = type;
        if (repaired) ++(*repaired);
      }
    } else {
      throw ParseError("malformed BIO tag \"" + tag + "\" at token " +
                       std::to_string(i));
    }
  }
  close(n - 1);
  return spans;
}

std::vector<std::string> spans_to_bio(const std::set<SpanAnnotation>& spans,
                                      int n_tokens) {
  // Walk spans in (start, end) order; any overlap shows up against the
  // furthest-reaching earlier span.
  const SpanAnnotation* reach = nullptr;
  for (const auto& s : spans) {
    check_span_range(s, n_tokens, "?");
    if (reach && s.start <= reach->end) {
      throw ValidationError("overlapping spans " + reach->str() + " and " +
                            s.str() + " cannot be written as BIO tags");
    }
    if (!reach || s.end > reach->end) reach = &s;
  }

  std::vector<std::string> tags(n_tokens, "O");
  for (const auto& s : spans) {
    tags[s.start] = "B-" + s.type;
    for (int i = s.start + 1; i <= s.end; ++i) tags[i] = "I-" + s.type;
  }
  return tags;
}

std::vector<Batch> make_batches(const Corpus& corpus, const Vocab& vocab,
                                int batch_size, unsigned long long seed,
                                int max_span_len) {
  if (batch_size < 1) {
    throw ValidationError("batch size must be >= 1, got " +
                          std::to_string(batch_size));
  }

  std::vector<int> order(corpus.sentences.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(0, i)]);
  }

  std::vector<Batch> batches;
  for (size_t at = 0; at < order.size(); at += batch_size) {
    const size_t stop = std::min(at + batch_size, order.size());
    Batch batch;
    for (size_t b = at; b < stop; ++b) {
      const Sentence& sent = corpus.sentences[order[b]];
      batch.sentences.push_back(&sent);
      batch.max_n = std::max(batch.max_n, sent.length());
    }
    for (const Sentence* sent : batch.sentences) {
      std::vector<int> ids(batch.max_n, Vocab::kPad);
      for (int i = 0; i < sent->length(); ++i) ids[i] = vocab.id(sent->tokens[i]);
      batch.token_ids.push_back(std::move(ids));
      batch.masks.push_back(Mask{batch.max_n, sent->length(), max_span_len});
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "the",  "old",  "river", "turns", "under", "grey",
      "stone", "light", "while", "maps",  "fade",  "slowly"};
  return words;
}

}  // namespace

Corpus synth_corpus(unsigned long long seed, int n_sentences, int type_count,
                    bool nested) {
  if (n_sentences < 0) {
    throw ValidationError("synthetic corpus size must be >= 0");
  }
  if (type_count < 1) {
    throw ValidationError("synthetic corpus needs at least one entity type");
  }

  const auto& fillers = filler_words();
  Rng rng(seed);
  auto filler = [&]() { return fillers[rng.uniform_int(0, static_cast<int>(fillers.size()) - 1)]; };
  auto type_name = [](int t) { return "T" + std::to_string(t); };
  auto open_tok = [](int t) { return "open" + std::to_string(t); };
  auto close_tok = [](int t) { return "close" + std::to_string(t); };

  Corpus corpus;
  for (int si = 0; si < n_sentences; ++si) {
    Sentence sent;
    sent.id = "synth-" + std::to_string(si);
    auto pad = [&](int count) {
      for (int i = 0; i < count; ++i) sent.tokens.push_back(filler());
    };

    const bool make_nested = nested && type_count >= 2 && rng.bernoulli(0.3);
    if (make_nested) {
      // outer entity of one type with a different-type entity strictly
      // inside it; the outer span is always at least six tokens long
      const int outer = rng.uniform_int(0, type_count - 1);
      int inner = rng.uniform_int(0, type_count - 2);
      if (inner >= outer) ++inner;
      int a = rng.uniform_int(0, 2);
      int b = rng.uniform_int(0, 3);
      int c = rng.uniform_int(0, 2);
      if (a + b + c < 2) c += 2 - (a + b + c);

      pad(rng.uniform_int(0, 2));
      const int outer_start = sent.length();
      sent.tokens.push_back(open_tok(outer));
      pad(a);
      const int inner_start = sent.length();
      sent.tokens.push_back(open_tok(inner));
      pad(b);
      sent.tokens.push_back(close_tok(inner));
      const int inner_end = sent.length() - 1;
      pad(c);
      sent.tokens.push_back(close_tok(outer));
      const int outer_end = sent.length() - 1;
      pad(rng.uniform_int(0, 2));

      sent.annotations.insert({outer_start, outer_end, type_name(outer)});
      sent.annotations.insert({inner_start, inner_end, type_name(inner)});
    } else if (rng.bernoulli(0.1)) {
      pad(rng.uniform_int(4, 8));  // no entities at all
    } else {
      const int n_ents =
          (type_count >= 2 && rng.bernoulli(0.35)) ? 2 : 1;
      // distinct types so a sentence never repeats a type
      std::vector<int> types(type_count);
      for (int t = 0; t < type_count; ++t) types[t] = t;
      for (int i = type_count - 1; i > 0; --i) {
        std::swap(types[i], types[rng.uniform_int(0, i)]);
      }

      pad(rng.uniform_int(0, 2));
      for (int e = 0; e < n_ents; ++e) {
        if (e > 0) pad(rng.uniform_int(1, 2));
        const int t = types[e];
        const int start = sent.length();
        sent.tokens.push_back(open_tok(t));
        pad(rng.uniform_int(0, 3));
        sent.tokens.push_back(close_tok(t));
        sent.annotations.insert({start, sent.length() - 1, type_name(t)});
      }
      pad(rng.uniform_int(0, 2));
    }

    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

}  // namespace gpner
