#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sensekit {

/// Classifier key: lemma plus optional part-of-speech tag. Corpora either
/// carry POS on every lexelt (English style) or on none (Chinese style).
struct Lexelt {
    std::string lemma;
    std::optional<std::string> pos;

    std::string key() const { return pos ? lemma + "." + *pos : lemma; }
    bool operator==(const Lexelt& other) const = default;
};

/// One sense-annotated occurrence of a target word in its sentence.
struct Instance {
    std::string id;
    std::vector<std::string> words;
    std::size_t target_index = 0;
    Lexelt lexelt;
    std::vector<std::string> gold_senses; // in listed order; may be empty
    std::optional<std::vector<std::string>> left_neighbor;
    std::optional<std::vector<std::string>> right_neighbor;
    std::optional<std::string> genre;
};

/// Ordered senses per lexelt with training frequency counts. Sense order is
/// first-appearance order in the corpus and defines the output-vector index
/// of each sense.
class SenseInventory {
public:
    struct Entry {
        std::vector<std::string> senses;
        std::vector<std::uint64_t> counts;

        bool operator==(const Entry&) const = default;
    };

    void observe(const Lexelt& lexelt, const std::string& sense);
    const Entry* find(const Lexelt& lexelt) const;
    const Entry* find_key(const std::string& key) const;
    std::optional<std::size_t> sense_index(const Lexelt& lexelt,
                                           const std::string& sense) const;
    std::size_t num_lexelts() const { return entries_.size(); }
    const std::map<std::string, Entry>& entries() const { return entries_; }
    Entry& entry_for_key(const std::string& key) { return entries_[key]; }

    /// Hash of the canonical serialization; used to refuse mismatched
    /// checkpoints.
    std::uint64_t hash() const;

    bool operator==(const SenseInventory& other) const = default;

private:
    std::map<std::string, Entry> entries_;
};

struct Corpus {
    std::vector<Instance> instances;
    SenseInventory inventory;
};

/// Reads native records (one JSON object per line). Instances are validated;
/// the inventory is built from the gold annotations in file order.
Corpus load_corpus(const std::string& path);
Corpus parse_corpus(const std::string& text, const std::string& origin = "<memory>");
SenseInventory build_inventory(const std::vector<Instance>& instances);

void save_corpus(const std::vector<Instance>& instances, const std::string& path);
std::string corpus_to_text(const std::vector<Instance>& instances);

/// Throws InputError if any labeled instance references a sense missing from
/// `inventory`.
void validate_against_inventory(const std::vector<Instance>& instances,
                                const SenseInventory& inventory);

enum class SplitBucket { train, dev, test };

struct SplitPlan {
    std::map<std::string, SplitBucket> assignment; // instance id -> bucket
    std::vector<std::string> single_instance_lexelts; // dev got none; flagged

    SplitBucket bucket(const std::string& id) const;
};

/// Per word type, ceil(ratio * count) instances go to dev via a seeded
/// shuffle; the rest stay in train. A type with a single instance keeps it
/// in train and is flagged.
SplitPlan make_lexical_sample_split(const std::vector<Instance>& instances,
                                    double ratio, std::uint64_t seed);

/// Highest training-frequency sense, ties broken by inventory order.
/// Unseen lexelt yields nullopt (the caller decides how to back off).
std::optional<std::string> most_frequent_sense(const SenseInventory& inventory,
                                               const Lexelt& lexelt);

} // namespace sensekit
