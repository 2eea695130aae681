#include "afg/textproc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "afg/error.hpp"

namespace afg::text {

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool opens_sentence(char c) noexcept { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

bool ends_with_abbreviation(std::string_view upto, const std::vector<std::string>& abbreviations) {
  for (const auto& abbr : abbreviations) {
    if (abbr.empty() || upto.size() < abbr.size()) continue;
    if (upto.substr(upto.size() - abbr.size()) != abbr) continue;
    const std::size_t before = upto.size() - abbr.size();
    if (before == 0 || is_space(upto[before - 1]) || upto[before - 1] == '(') return true;
  }
  return false;
}

}  // namespace

std::size_t utf8_length(unsigned char lead) noexcept {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text, const SegmenterOptions& options) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') {
      ++depth;
      continue;
    }
    if (c == ')') {
      if (depth > 0) --depth;
      continue;
    }
    if (depth > 0 || (c != '.' && c != '!' && c != '?')) continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j >= text.size() || !opens_sentence(text[j])) continue;
    if (c == '.' && ends_with_abbreviation(text.substr(0, i + 1), options.abbreviations)) continue;
    const auto sentence = trim(text.substr(start, i + 1 - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = j;
    i = j - 1;
  }
  const auto rest = trim(text.substr(std::min(start, text.size())));
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

std::vector<std::string> read_abbreviations(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() : tokens_{std::string(kPadToken), std::string(kUnknownToken)} {
  index_.emplace(tokens_[0], kPadId);
  index_.emplace(tokens_[1], kUnknownId);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnknownToken)
    throw DataError("vocabulary must start with [PAD] and [UNK]");
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  v.index_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.empty()) throw DataError("vocabulary entry " + std::to_string(i) + " is empty");
    if (t == kContinuation) throw DataError("vocabulary entry " + std::to_string(i) + " is a bare marker");
    if (!v.index_.emplace(t, static_cast<TokenId>(i)).second)
      throw DataError("duplicate vocabulary entry '" + t + "'");
  }
  v.tokens_ = std::move(tokens);
  return v;
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string_view> whitespace_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t begin = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > begin) words.push_back(text.substr(begin, i - begin));
  }
  return words;
}

}  // namespace

Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                       std::size_t min_frequency) {
  if (corpus.empty()) throw ArgumentError("build_vocab: empty corpus");
  if (max_size <= 2) throw ArgumentError("build_vocab: max_size must exceed the reserved tokens");
  min_frequency = std::max<std::size_t>(min_frequency, 1);

  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& doc : corpus)
    for (const auto w : whitespace_words(doc)) ++word_counts[ascii_lower(w)];

  // Symbols are interned as ints; words become symbol-id sequences.
  std::vector<std::string> symbols;
  std::unordered_map<std::string, std::int32_t> symbol_ids;
  auto intern = [&](const std::string& s) {
    const auto [it, inserted] = symbol_ids.emplace(s, static_cast<std::int32_t>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  struct Word {
    std::vector<std::int32_t> pieces;
    std::uint64_t count;
  };
  std::vector<Word> words;
  words.reserve(word_counts.size());
  std::vector<std::uint64_t> symbol_freq;
  for (const auto& [w, count] : word_counts) {
    Word word{{}, count};
    for (std::size_t i = 0; i < w.size();) {
      const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(w[i])), w.size() - i);
      std::string piece = (i == 0 ? std::string() : std::string(Vocabulary::kContinuation)) + w.substr(i, len);
      const auto id = intern(piece);
      if (symbol_freq.size() <= static_cast<std::size_t>(id)) symbol_freq.resize(id + 1, 0);
      symbol_freq[id] += count;
      word.pieces.push_back(id);
      i += len;
    }
    words.push_back(std::move(word));
  }

  // Alphabet: most frequent characters first, ties lexicographic.
  std::vector<std::int32_t> alphabet;
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(symbols.size()); ++id)
    if (symbol_freq[id] >= min_frequency) alphabet.push_back(id);
  std::sort(alphabet.begin(), alphabet.end(), [&](std::int32_t a, std::int32_t b) {
    if (symbol_freq[a] != symbol_freq[b]) return symbol_freq[a] > symbol_freq[b];
    return symbols[a] < symbols[b];
  });
  if (alphabet.size() > max_size - 2) alphabet.resize(max_size - 2);

  std::vector<std::string> tokens = {std::string(Vocabulary::kPadToken),
                                     std::string(Vocabulary::kUnknownToken)};
  std::vector<char> in_vocab(symbols.size(), 0);
  std::vector<std::string> sorted_alphabet;
  for (const auto id : alphabet) {
    in_vocab[id] = 1;
    sorted_alphabet.push_back(symbols[id]);
  }
  std::sort(sorted_alphabet.begin(), sorted_alphabet.end());
  tokens.insert(tokens.end(), sorted_alphabet.begin(), sorted_alphabet.end());
  std::unordered_map<std::string, char> token_set;
  for (const auto& t : tokens) token_set.emplace(t, 1);

  auto merged_text = [&](std::int32_t left, std::int32_t right) {
    std::string_view r = symbols[right];
    r.remove_prefix(Vocabulary::kContinuation.size());
    return symbols[left] + std::string(r);
  };

  while (tokens.size() < max_size) {
    std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.pieces.size(); ++i) {
        const auto a = w.pieces[i];
        const auto b = w.pieces[i + 1];
        if (!in_vocab[a] || !in_vocab[b]) continue;
        pair_counts[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)] += w.count;
      }
    }
    std::uint64_t best_key = 0;
    std::uint64_t best_count = 0;
    for (const auto& [key, count] : pair_counts) {
      if (count < min_frequency) continue;
      if (count > best_count) {
        best_key = key;
        best_count = count;
        continue;
      }
      if (count == best_count) {
        const auto a = static_cast<std::int32_t>(key >> 32), b = static_cast<std::int32_t>(key & 0xffffffffu);
        const auto ba = static_cast<std::int32_t>(best_key >> 32),
                   bb = static_cast<std::int32_t>(best_key & 0xffffffffu);
        if (std::tie(symbols[a], symbols[b]) < std::tie(symbols[ba], symbols[bb])) best_key = key;
      }
    }
    if (best_count == 0) break;

    const auto left = static_cast<std::int32_t>(best_key >> 32);
    const auto right = static_cast<std::int32_t>(best_key & 0xffffffffu);
    const std::string merged = merged_text(left, right);
    const auto merged_id = intern(merged);
    if (in_vocab.size() < symbols.size()) in_vocab.resize(symbols.size(), 0);
    in_vocab[merged_id] = 1;
    if (token_set.emplace(merged, 1).second) tokens.push_back(merged);

    for (auto& w : words) {
      std::vector<std::int32_t> next;
      next.reserve(w.pieces.size());
      for (std::size_t i = 0; i < w.pieces.size(); ++i) {
        if (i + 1 < w.pieces.size() && w.pieces[i] == left && w.pieces[i + 1] == right) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(w.pieces[i]);
        }
      }
      w.pieces = std::move(next);
    }
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

namespace {

constexpr std::size_t kMaxWordBytes = 200;

}  // namespace

TokenSequence tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSequence out;
  std::string candidate;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t word_begin = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i == word_begin) break;
    const std::string word = ascii_lower(text.substr(word_begin, i - word_begin));

    if (word.size() > kMaxWordBytes) {
      out.ids.push_back(Vocabulary::kUnknownId);
      out.spans.push_back({word_begin, i});
      continue;
    }

    std::size_t start = 0;
    while (start < word.size()) {
      // Candidate ends sit on code-point boundaries.
      std::vector<std::size_t> ends;
      for (std::size_t p = start; p < word.size();) {
        p += std::min(utf8_length(static_cast<unsigned char>(word[p])), word.size() - p);
        ends.push_back(p);
      }
      std::optional<TokenId> match;
      std::size_t match_end = start;
      for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
        candidate.clear();
        if (start > 0) candidate += Vocabulary::kContinuation;
        candidate.append(word, start, *it - start);
        if (const auto id = vocab.find(candidate)) {
          match = id;
          match_end = *it;
          break;
        }
      }
      if (!match) {
        out.ids.push_back(Vocabulary::kUnknownId);
        out.spans.push_back({word_begin + start, word_begin + word.size()});
        break;
      }
      out.ids.push_back(*match);
      out.spans.push_back({word_begin + start, word_begin + match_end});
      start = match_end;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_term_char_ascii(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '.';
}

// Decodes the code point at s[i] (len bytes). Invalid sequences decode to
// U+FFFD and count as letters.
std::uint32_t decode(std::string_view s, std::size_t i, std::size_t len) noexcept {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (len == 1) return b0;
  std::uint32_t cp = len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  return cp;
}

bool is_separator(std::uint32_t cp) noexcept {
  if (cp < 0x80) return !is_term_char_ascii(static_cast<unsigned char>(cp));
  if (cp == 0x00A0 || cp == 0x00AB || cp == 0x00BB || cp == 0x00B7) return true;
  return cp >= 0x2000 && cp <= 0x206F;  // General Punctuation: dashes, quotes, spaces
}

}  // namespace

TermVector term_vector(std::string_view text) {
  TermVector out;
  std::string term;
  auto flush = [&] {
    std::string_view t = term;
    while (!t.empty() && (t.front() == '.' || t.front() == '-')) t.remove_prefix(1);
    while (!t.empty() && (t.back() == '.' || t.back() == '-')) t.remove_suffix(1);
    if (!t.empty()) ++out[ascii_lower(t)];
    term.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(text[i])), text.size() - i);
    if (is_separator(decode(text, i, len))) {
      flush();
    } else {
      term.append(text, i, len);
    }
    i += len;
  }
  flush();
  return out;
}

double cosine_similarity(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, c] : a) na += static_cast<double>(c) * static_cast<double>(c);
  for (const auto& [t, c] : b) nb += static_cast<double>(c) * static_cast<double>(c);
  // Walk the two sorted maps together.
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * static_cast<double>(ib->second);
      ++ia;
      ++ib;
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace afg::text
