#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sensekit/corpus.hpp"

namespace sensekit {

inline constexpr const char* kUnknownPiece = "[UNK]";
inline constexpr const char* kClsPiece = "[CLS]";
inline constexpr const char* kSepPiece = "[SEP]";
inline constexpr const char* kContinuationPrefix = "##";

/// Subword vocabulary: one piece per line, line number = piece id.
/// Lowercasing is a property of the vocabulary (off for Chinese).
class Vocabulary {
public:
    static Vocabulary load(const std::string& path, bool lowercase = true);
    static Vocabulary from_pieces(std::vector<std::string> pieces,
                                  bool lowercase = true);
    void save(const std::string& path) const;

    std::int32_t id(const std::string& piece) const; // -1 when absent
    const std::string& piece(std::size_t id) const;
    std::size_t size() const { return pieces_.size(); }
    bool lowercase() const { return lowercase_; }
    std::int32_t unknown_id() const { return unknown_id_; }
    std::int32_t cls_id() const;
    std::int32_t sep_id() const;
    std::uint64_t hash() const;

    /// ASCII-only lowercasing; multibyte UTF-8 passes through untouched.
    std::string normalize(const std::string& word) const;

private:
    std::vector<std::string> pieces_;
    std::unordered_map<std::string, std::int32_t> index_;
    bool lowercase_ = true;
    std::int32_t unknown_id_ = -1;
    std::int32_t cls_id_ = -1;
    std::int32_t sep_id_ = -1;

    void build_index();
};

struct WordSpan {
    std::size_t begin = 0; // piece index, inclusive
    std::size_t end = 0;   // piece index, exclusive

    std::size_t length() const { return end - begin; }
    bool operator==(const WordSpan&) const = default;
};

struct TokenizedInput {
    std::vector<std::int32_t> pieces;
    std::vector<std::int32_t> segments;          // one of {0, 1} per piece
    std::vector<WordSpan> word_spans;            // aligned words, in order
    std::vector<std::size_t> special_positions;  // [CLS]/[SEP] piece indices
    bool truncated = false;

    std::size_t num_pieces() const { return pieces.size(); }
    std::size_t num_words() const { return word_spans.size(); }
};

/// Greedy longest-match-first subword split. Continuation pieces carry the
/// "##" prefix; a word with no viable split becomes a single unknown piece.
/// No special tokens are added here.
TokenizedInput tokenize(const std::vector<std::string>& words,
                        const Vocabulary& vocab);

enum class ContextMode { one_sent, one_sent_one_sur };

std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(const std::string& name);

/// Frames an instance for the encoder.
///
/// 1sent:       [CLS] current [SEP], all segment 0.
/// 1sent+1sur:  [CLS] left [SEP] current [SEP] right [SEP]; the current
///              sentence's pieces carry segment 1, everything else 0. A
///              missing neighbor drops its block, so at a document boundary
///              the framing degrades to the current sentence alone.
///
/// Word spans cover the current sentence's words only. If the pieces exceed
/// max_positions, neighbor words are dropped (left first, then right) and
/// the result is flagged truncated; a current sentence that does not fit on
/// its own is an error.
TokenizedInput build_context(const Instance& instance, ContextMode mode,
                             const Vocabulary& vocab, std::size_t max_positions);

} // namespace sensekit
