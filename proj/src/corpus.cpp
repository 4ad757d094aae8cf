#include "sensekit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sensekit/errors.hpp"
#include "sensekit/hashing.hpp"
#include "sensekit/rng.hpp"

namespace sensekit {

using ordered_json = nlohmann::ordered_json;

void SenseInventory::observe(const Lexelt& lexelt, const std::string& sense) {
    Entry& entry = entries_[lexelt.key()];
    for (std::size_t i = 0; i < entry.senses.size(); ++i) {
        if (entry.senses[i] == sense) {
            ++entry.counts[i];
            return;
        }
    }
    entry.senses.push_back(sense);
    entry.counts.push_back(1);
}

const SenseInventory::Entry* SenseInventory::find(const Lexelt& lexelt) const {
    return find_key(lexelt.key());
}

const SenseInventory::Entry* SenseInventory::find_key(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::size_t> SenseInventory::sense_index(const Lexelt& lexelt,
                                                       const std::string& sense) const {
    const Entry* entry = find(lexelt);
    if (!entry) return std::nullopt;
    for (std::size_t i = 0; i < entry->senses.size(); ++i) {
        if (entry->senses[i] == sense) return i;
    }
    return std::nullopt;
}

std::uint64_t SenseInventory::hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& [key, entry] : entries_) {
        h = fnv1a64(key, h);
        h = fnv1a64("\x1f", h);
        for (std::size_t i = 0; i < entry.senses.size(); ++i) {
            h = fnv1a64(entry.senses[i], h);
            std::string count = std::to_string(entry.counts[i]);
            h = fnv1a64(count, h);
            h = fnv1a64("\x1e", h);
        }
    }
    return h;
}

namespace {

Instance parse_record(const ordered_json& record, const std::string& where) {
    Instance inst;
    try {
        inst.id = record.at("id").get<std::string>();
        inst.words = record.at("words").get<std::vector<std::string>>();
        long long target = record.at("target").get<long long>();
        inst.lexelt.lemma = record.at("lemma").get<std::string>();
        if (record.contains("pos")) {
            inst.lexelt.pos = record.at("pos").get<std::string>();
        }
        inst.gold_senses = record.at("senses").get<std::vector<std::string>>();
        if (record.contains("left")) {
            inst.left_neighbor = record.at("left").get<std::vector<std::string>>();
        }
        if (record.contains("right")) {
            inst.right_neighbor = record.at("right").get<std::vector<std::string>>();
        }
        if (record.contains("genre")) {
            inst.genre = record.at("genre").get<std::string>();
        }
        if (inst.id.empty()) throw InputError(where + ": empty instance id");
        if (inst.words.empty()) throw InputError(where + ": empty word list");
        if (target < 0 || static_cast<std::size_t>(target) >= inst.words.size()) {
            throw InputError(where + ": target index " + std::to_string(target) +
                             " out of range for " + std::to_string(inst.words.size()) +
                             " words");
        }
        inst.target_index = static_cast<std::size_t>(target);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(where + ": " + e.what());
    }
    return inst;
}

} // namespace

Corpus parse_corpus(const std::string& text, const std::string& origin) {
    Corpus corpus;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<bool> pos_scheme; // all lexelts carry pos, or none do
    std::set<std::string> seen_ids;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": malformed record: " + e.what());
        }
        Instance inst = parse_record(record, where);
        if (!seen_ids.insert(inst.id).second) {
            throw InputError(where + ": duplicate instance id '" + inst.id + "'");
        }
        bool has_pos = inst.lexelt.pos.has_value();
        if (!pos_scheme) {
            pos_scheme = has_pos;
        } else if (*pos_scheme != has_pos) {
            throw InputError(where + ": lexelt '" + inst.lexelt.lemma + "' " +
                             (has_pos ? "carries" : "lacks") +
                             " a pos tag while earlier records use the other scheme");
        }
        corpus.instances.push_back(std::move(inst));
    }
    corpus.inventory = build_inventory(corpus.instances);
    return corpus;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open corpus file '" + path + "'");
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_corpus(buffer.str(), path);
}

SenseInventory build_inventory(const std::vector<Instance>& instances) {
    SenseInventory inventory;
    for (const Instance& inst : instances) {
        // One count per labeled instance; multi-gold counts the first listed.
        if (!inst.gold_senses.empty()) {
            inventory.observe(inst.lexelt, inst.gold_senses.front());
        }
    }
    return inventory;
}

std::string corpus_to_text(const std::vector<Instance>& instances) {
    std::ostringstream out;
    for (const Instance& inst : instances) {
        ordered_json record;
        record["id"] = inst.id;
        record["words"] = inst.words;
        record["target"] = inst.target_index;
        record["lemma"] = inst.lexelt.lemma;
        if (inst.lexelt.pos) record["pos"] = *inst.lexelt.pos;
        record["senses"] = inst.gold_senses;
        if (inst.left_neighbor) record["left"] = *inst.left_neighbor;
        if (inst.right_neighbor) record["right"] = *inst.right_neighbor;
        if (inst.genre) record["genre"] = *inst.genre;
        out << record.dump() << "\n";
    }
    return out.str();
}

void save_corpus(const std::vector<Instance>& instances, const std::string& path) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw InputError("cannot open '" + path + "' for writing");
    file << corpus_to_text(instances);
    if (!file) throw InputError("write failed for '" + path + "'");
}

void validate_against_inventory(const std::vector<Instance>& instances,
                                const SenseInventory& inventory) {
    for (const Instance& inst : instances) {
        for (const std::string& sense : inst.gold_senses) {
            if (!inventory.sense_index(inst.lexelt, sense)) {
                throw InputError("instance '" + inst.id + "': sense '" + sense +
                                 "' not in the inventory of lexelt '" +
                                 inst.lexelt.key() + "'");
            }
        }
    }
}

SplitBucket SplitPlan::bucket(const std::string& id) const {
    auto it = assignment.find(id);
    if (it == assignment.end()) {
        throw InputError("split plan: unknown instance id '" + id + "'");
    }
    return it->second;
}

SplitPlan make_lexical_sample_split(const std::vector<Instance>& instances,
                                    double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InputError("split ratio must be in (0, 1)");
    }
    // Group instance positions per word type, preserving corpus order.
    std::map<std::string, std::vector<std::size_t>> by_type;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        by_type[instances[i].lexelt.key()].push_back(i);
    }

    SplitPlan plan;
    for (const auto& [key, positions] : by_type) {
        if (positions.size() == 1) {
            plan.assignment[instances[positions[0]].id] = SplitBucket::train;
            plan.single_instance_lexelts.push_back(key);
            continue;
        }
        std::vector<std::size_t> order = positions;
        // Per-type generator keyed off the master seed so the plan does not
        // depend on lexelt iteration order.
        Rng rng(splitmix64(seed ^ fnv1a64(key)));
        rng.shuffle(order);
        std::size_t dev_count = static_cast<std::size_t>(
            std::ceil(ratio * static_cast<double>(positions.size())));
        dev_count = std::min(dev_count, positions.size() - 1);
        for (std::size_t i = 0; i < order.size(); ++i) {
            plan.assignment[instances[order[i]].id] =
                i < dev_count ? SplitBucket::dev : SplitBucket::train;
        }
    }
    return plan;
}

std::optional<std::string> most_frequent_sense(const SenseInventory& inventory,
                                               const Lexelt& lexelt) {
    const SenseInventory::Entry* entry = inventory.find(lexelt);
    if (!entry || entry->senses.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < entry->counts.size(); ++i) {
        if (entry->counts[i] > entry->counts[best]) best = i; // ties keep earlier
    }
    return entry->senses[best];
}

} // namespace sensekit
