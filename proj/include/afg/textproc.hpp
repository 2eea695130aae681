#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace afg::text {

// ---------------------------------------------------------------------------
// Sentence segmentation
// ---------------------------------------------------------------------------

struct SegmenterOptions {
  // A '.' that ends one of these (preceded by whitespace or start of text)
  // never ends a sentence.
  std::vector<std::string> abbreviations = {"e.g.", "i.e.", "et al.", "Fig.", "vs.", "Dr."};
};

// Splits after '.', '!' or '?' when followed by whitespace and then an ASCII
// upper-case letter or digit. No split inside parentheses. Sentences are
// trimmed; whitespace-only input yields an empty list.
std::vector<std::string> segment_sentences(std::string_view text,
                                           const SegmenterOptions& options = {});

// One abbreviation per line; blank lines ignored.
std::vector<std::string> read_abbreviations(std::istream& in);

// ---------------------------------------------------------------------------
// Subword vocabulary and tokenizer
// ---------------------------------------------------------------------------

using TokenId = std::int32_t;

class Vocabulary {
 public:
  static constexpr std::string_view kPadToken = "[PAD]";
  static constexpr std::string_view kUnknownToken = "[UNK]";
  static constexpr std::string_view kContinuation = "##";
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kUnknownId = 1;

  Vocabulary();

  // tokens[0] and tokens[1] must be the reserved tokens; entries must be
  // unique and non-empty.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // One token per line, line number = id.
  static Vocabulary load(std::istream& in);
  void save(std::ostream& out) const;

  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
};

// Merge-based subword vocabulary. Words are whitespace-delimited and ASCII
// lower-cased; each word starts as its characters (non-initial ones carrying
// the "##" marker) and the most frequent adjacent pair is merged until the
// vocabulary holds `max_size` entries or no pair reaches `min_frequency`.
// Count ties go to the lexicographically smallest (left, right) pair.
Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                       std::size_t min_frequency = 1);

struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const ByteSpan&) const = default;
};

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<ByteSpan> spans;  // into the tokenized text
};

// Greedy longest-prefix matching per whitespace-delimited word. A word whose
// first piece cannot be matched becomes a single [UNK]; if a later piece
// fails, the unmatched remainder of the word becomes one [UNK].
TokenSequence tokenize(std::string_view text, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Bag-of-terms similarity
// ---------------------------------------------------------------------------

using TermVector = std::map<std::string, std::int64_t, std::less<>>;

// Lower-cased word counts. Hyphens and periods survive inside a term
// ("j.-l"), but are trimmed from its ends; every other punctuation mark,
// including Unicode dashes and quotes, separates terms.
TermVector term_vector(std::string_view text);

// dot(a, b) / (|a| |b|); 0 when either vector is empty.
double cosine_similarity(const TermVector& a, const TermVector& b);

// ---------------------------------------------------------------------------
// UTF-8 helpers shared by the tokenizer and the term extractor.
// ---------------------------------------------------------------------------

// Byte length of the UTF-8 sequence starting with `lead` (1 for invalid bytes).
std::size_t utf8_length(unsigned char lead) noexcept;

std::string ascii_lower(std::string_view s);

}  // namespace afg::text
