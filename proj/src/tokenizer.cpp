#include "sensekit/tokenizer.hpp"

#include <algorithm>
#include <fstream>

#include "sensekit/errors.hpp"
#include "sensekit/hashing.hpp"

namespace sensekit {

Vocabulary Vocabulary::load(const std::string& path, bool lowercase) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open vocabulary file '" + path + "'");
    std::vector<std::string> pieces;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pieces.push_back(line);
    }
    return from_pieces(std::move(pieces), lowercase);
}

Vocabulary Vocabulary::from_pieces(std::vector<std::string> pieces, bool lowercase) {
    Vocabulary vocab;
    vocab.pieces_ = std::move(pieces);
    vocab.lowercase_ = lowercase;
    vocab.build_index();
    if (vocab.unknown_id_ < 0) {
        throw InputError("vocabulary must contain the unknown piece [UNK]");
    }
    return vocab;
}

void Vocabulary::build_index() {
    index_.clear();
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        index_.emplace(pieces_[i], static_cast<std::int32_t>(i));
    }
    auto lookup = [this](const char* piece) {
        auto it = index_.find(piece);
        return it == index_.end() ? -1 : it->second;
    };
    unknown_id_ = lookup(kUnknownPiece);
    cls_id_ = lookup(kClsPiece);
    sep_id_ = lookup(kSepPiece);
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw InputError("cannot open '" + path + "' for writing");
    for (const std::string& piece : pieces_) file << piece << "\n";
}

std::int32_t Vocabulary::id(const std::string& piece) const {
    auto it = index_.find(piece);
    return it == index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::piece(std::size_t id) const {
    if (id >= pieces_.size()) throw InputError("vocabulary: piece id out of range");
    return pieces_[id];
}

std::int32_t Vocabulary::cls_id() const {
    if (cls_id_ < 0) throw InputError("vocabulary has no [CLS] piece");
    return cls_id_;
}

std::int32_t Vocabulary::sep_id() const {
    if (sep_id_ < 0) throw InputError("vocabulary has no [SEP] piece");
    return sep_id_;
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = fnv1a64(lowercase_ ? "lc\n" : "raw\n");
    for (const std::string& piece : pieces_) {
        h = fnv1a64(piece, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

std::string Vocabulary::normalize(const std::string& word) const {
    if (!lowercase_) return word;
    std::string out = word;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

namespace {

// Longest-match-first split of one word; empty result means no viable split.
std::vector<std::int32_t> split_word(const std::string& word, const Vocabulary& vocab) {
    std::vector<std::int32_t> out;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        std::int32_t match = -1;
        while (end > start) {
            std::string candidate = word.substr(start, end - start);
            if (start > 0) candidate = kContinuationPrefix + candidate;
            match = vocab.id(candidate);
            if (match >= 0) break;
            --end;
        }
        if (match < 0) return {};
        out.push_back(match);
        start = end;
    }
    return out;
}

} // namespace

TokenizedInput tokenize(const std::vector<std::string>& words, const Vocabulary& vocab) {
    if (words.empty()) throw InputError("tokenize: empty word sequence");
    TokenizedInput result;
    for (const std::string& raw : words) {
        std::string word = vocab.normalize(raw);
        std::vector<std::int32_t> pieces =
            word.empty() ? std::vector<std::int32_t>{} : split_word(word, vocab);
        if (pieces.empty()) pieces.push_back(vocab.unknown_id());
        WordSpan span{result.pieces.size(), result.pieces.size() + pieces.size()};
        result.pieces.insert(result.pieces.end(), pieces.begin(), pieces.end());
        result.word_spans.push_back(span);
    }
    result.segments.assign(result.pieces.size(), 0);
    return result;
}

std::string to_string(ContextMode mode) {
    return mode == ContextMode::one_sent ? "1sent" : "1sent+1sur";
}

ContextMode context_mode_from_string(const std::string& name) {
    if (name == "1sent") return ContextMode::one_sent;
    if (name == "1sent+1sur") return ContextMode::one_sent_one_sur;
    throw InputError("unknown context mode '" + name + "'");
}

namespace {

struct Framer {
    const Vocabulary& vocab;
    TokenizedInput out;

    void special(std::int32_t piece, std::int32_t segment) {
        out.special_positions.push_back(out.pieces.size());
        out.pieces.push_back(piece);
        out.segments.push_back(segment);
    }

    // Appends one sentence's pieces; records word spans only when aligned.
    void sentence(const std::vector<std::string>& words, std::int32_t segment,
                  bool aligned) {
        if (words.empty()) return;
        TokenizedInput toks = tokenize(words, vocab);
        std::size_t base = out.pieces.size();
        out.pieces.insert(out.pieces.end(), toks.pieces.begin(), toks.pieces.end());
        out.segments.insert(out.segments.end(), toks.pieces.size(), segment);
        if (aligned) {
            for (const WordSpan& span : toks.word_spans) {
                out.word_spans.push_back({span.begin + base, span.end + base});
            }
        }
    }
};

std::size_t piece_count(const std::vector<std::string>& words, const Vocabulary& vocab) {
    return words.empty() ? 0 : tokenize(words, vocab).pieces.size();
}

} // namespace

TokenizedInput build_context(const Instance& instance, ContextMode mode,
                             const Vocabulary& vocab, std::size_t max_positions) {
    if (instance.words.empty()) {
        throw InputError("instance '" + instance.id + "' has no sentence");
    }
    if (instance.target_index >= instance.words.size()) {
        throw InputError("instance '" + instance.id + "': target index " +
                         std::to_string(instance.target_index) + " out of range");
    }

    std::vector<std::string> left, right;
    if (mode == ContextMode::one_sent_one_sur) {
        if (instance.left_neighbor) left = *instance.left_neighbor;
        if (instance.right_neighbor) right = *instance.right_neighbor;
    }

    const std::size_t current_pieces = piece_count(instance.words, vocab);
    if (current_pieces + 2 > max_positions) {
        throw InputError("instance '" + instance.id + "' needs " +
                         std::to_string(current_pieces + 2 - max_positions) +
                         " pieces of truncation beyond its own sentence; " +
                         "max_positions=" + std::to_string(max_positions));
    }

    // Neighbors are trimmed before the current sentence is ever touched:
    // left words first (from the sentence start), then right words (from the
    // sentence end).
    bool truncated = false;
    auto total = [&]() {
        std::size_t specials = 2 + (left.empty() ? 0 : 1) + (right.empty() ? 0 : 1);
        return piece_count(left, vocab) + current_pieces + piece_count(right, vocab) +
               specials;
    };
    while (total() > max_positions) {
        if (!left.empty()) {
            left.erase(left.begin());
        } else if (!right.empty()) {
            right.pop_back();
        }
        truncated = true;
    }

    Framer framer{vocab, {}};
    const std::int32_t current_segment =
        mode == ContextMode::one_sent_one_sur ? 1 : 0;
    framer.special(vocab.cls_id(), 0);
    if (!left.empty()) {
        framer.sentence(left, 0, false);
        framer.special(vocab.sep_id(), 0);
    }
    framer.sentence(instance.words, current_segment, true);
    framer.special(vocab.sep_id(), current_segment);
    if (!right.empty()) {
        framer.sentence(right, 0, false);
        framer.special(vocab.sep_id(), 0);
    }
    framer.out.truncated = truncated;
    return framer.out;
}

} // namespace sensekit
