#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sensekit/convert.hpp"
#include "sensekit/corpus.hpp"
#include "sensekit/errors.hpp"

using namespace sensekit;

namespace {

const char* kToyCorpus =
    R"({"id":"bank.1","words":["the","bank","flooded"],"target":1,"lemma":"bank","pos":"n","senses":["river"]}
{"id":"bank.2","words":["a","bank","loan"],"target":1,"lemma":"bank","pos":"n","senses":["money"],"genre":"finance"}
{"id":"bank.3","words":["the","bank","burst"],"target":1,"lemma":"bank","pos":"n","senses":["river"]}
{"id":"cold.1","words":["a","cold","wind"],"target":1,"lemma":"cold","pos":"a","senses":["temp"],"left":["night","fell"],"right":["we","left"]}
)";

std::string fixture(const std::string& name) {
    return std::string(SENSEKIT_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream file(path);
    REQUIRE(file);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("loading a toy corpus builds the inventory with hand counts") {
    Corpus corpus = parse_corpus(kToyCorpus);
    REQUIRE(corpus.instances.size() == 4);
    CHECK(corpus.inventory.num_lexelts() == 2);

    const auto* bank = corpus.inventory.find(Lexelt{"bank", "n"});
    REQUIRE(bank != nullptr);
    CHECK(bank->senses == std::vector<std::string>{"river", "money"});
    CHECK(bank->counts == std::vector<std::uint64_t>{2, 1});

    const auto* cold = corpus.inventory.find(Lexelt{"cold", "a"});
    REQUIRE(cold != nullptr);
    CHECK(cold->counts == std::vector<std::uint64_t>{1});

    CHECK(corpus.instances[3].left_neighbor ==
          std::vector<std::string>{"night", "fell"});
    CHECK(corpus.instances[1].genre == "finance");
}

TEST_CASE("empty file loads as an empty corpus and inventory") {
    Corpus corpus = parse_corpus("");
    CHECK(corpus.instances.empty());
    CHECK(corpus.inventory.num_lexelts() == 0);
}

TEST_CASE("out-of-range target index is rejected with a position diagnostic") {
    const char* bad =
        R"({"id":"x.1","words":["a","b"],"target":2,"lemma":"x","senses":[]})";
    CHECK_THROWS_WITH_AS(parse_corpus(bad, "toy"),
                         doctest::Contains("toy:1"), InputError);
    CHECK_THROWS_WITH_AS(parse_corpus(bad, "toy"),
                         doctest::Contains("target index 2"), InputError);
}

TEST_CASE("duplicate instance ids are rejected") {
    const char* duplicated =
        R"({"id":"a.1","words":["a"],"target":0,"lemma":"a","pos":"n","senses":["s"]}
{"id":"a.1","words":["b"],"target":0,"lemma":"b","pos":"n","senses":["s"]}
)";
    CHECK_THROWS_WITH_AS(parse_corpus(duplicated, "toy"), doctest::Contains("a.1"),
                         InputError);
}

TEST_CASE("mixing pos-tagged and untagged lexelts is rejected") {
    const char* mixed =
        R"({"id":"a.1","words":["a"],"target":0,"lemma":"a","pos":"n","senses":["s"]}
{"id":"b.1","words":["b"],"target":0,"lemma":"b","senses":["s"]}
)";
    CHECK_THROWS_WITH_AS(parse_corpus(mixed, "toy"), doctest::Contains("toy:2"),
                         InputError);
    // An all-untagged corpus (the Chinese-style scheme) stays valid.
    const char* untagged =
        R"({"id":"a.1","words":["a"],"target":0,"lemma":"a","senses":["s"]}
{"id":"b.1","words":["b"],"target":0,"lemma":"b","senses":["s"]}
)";
    CHECK(parse_corpus(untagged).instances.size() == 2);
}

TEST_CASE("malformed json reports its line number") {
    std::string text = std::string(kToyCorpus) + "{not json\n";
    CHECK_THROWS_WITH_AS(parse_corpus(text, "toy"), doctest::Contains("toy:5"),
                         InputError);
}

TEST_CASE("corpus round-trips through serialization") {
    Corpus corpus = parse_corpus(kToyCorpus);
    std::string text = corpus_to_text(corpus.instances);
    Corpus again = parse_corpus(text);
    REQUIRE(again.instances.size() == corpus.instances.size());
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
        const Instance& a = corpus.instances[i];
        const Instance& b = again.instances[i];
        CHECK(a.id == b.id);
        CHECK(a.words == b.words);
        CHECK(a.target_index == b.target_index);
        CHECK(a.lexelt == b.lexelt);
        CHECK(a.gold_senses == b.gold_senses);
        CHECK(a.left_neighbor == b.left_neighbor);
        CHECK(a.right_neighbor == b.right_neighbor);
        CHECK(a.genre == b.genre);
    }
    CHECK(again.inventory == corpus.inventory);
    CHECK(again.inventory.hash() == corpus.inventory.hash());
}

TEST_CASE("validation catches senses outside a foreign inventory") {
    Corpus corpus = parse_corpus(kToyCorpus);
    SenseInventory other;
    other.observe(Lexelt{"bank", "n"}, "river");
    CHECK_THROWS_WITH_AS(validate_against_inventory(corpus.instances, other),
                         doctest::Contains("money"), InputError);
    validate_against_inventory(corpus.instances, corpus.inventory); // passes
}

TEST_CASE("sense indexing is a stable bijection") {
    Corpus corpus = parse_corpus(kToyCorpus);
    const auto* bank = corpus.inventory.find(Lexelt{"bank", "n"});
    REQUIRE(bank);
    std::set<std::size_t> seen;
    for (const std::string& sense : bank->senses) {
        auto idx = corpus.inventory.sense_index(Lexelt{"bank", "n"}, sense);
        REQUIRE(idx.has_value());
        CHECK(*idx < bank->senses.size());
        seen.insert(*idx);
    }
    CHECK(seen.size() == bank->senses.size());
    CHECK_FALSE(
        corpus.inventory.sense_index(Lexelt{"bank", "n"}, "unknown").has_value());
}

namespace {

std::vector<Instance> instances_of_one_type(std::size_t count) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < count; ++i) {
        Instance inst;
        inst.id = "w." + std::to_string(i);
        inst.words = {"w"};
        inst.target_index = 0;
        inst.lexelt.lemma = "w";
        inst.gold_senses = {"s"};
        out.push_back(inst);
    }
    return out;
}

} // namespace

TEST_CASE("20 percent split takes two of ten instances per type") {
    std::vector<Instance> instances = instances_of_one_type(10);
    SplitPlan plan = make_lexical_sample_split(instances, 0.2, 7);
    std::size_t dev = 0;
    for (const Instance& inst : instances) {
        if (plan.bucket(inst.id) == SplitBucket::dev) ++dev;
    }
    CHECK(dev == 2);
    CHECK(plan.single_instance_lexelts.empty());
}

TEST_CASE("split is deterministic for a fixed seed") {
    std::vector<Instance> instances = instances_of_one_type(10);
    SplitPlan a = make_lexical_sample_split(instances, 0.2, 99);
    SplitPlan b = make_lexical_sample_split(instances, 0.2, 99);
    CHECK(a.assignment == b.assignment);
    SplitPlan c = make_lexical_sample_split(instances, 0.2, 100);
    CHECK(a.assignment != c.assignment); // overwhelmingly likely for 10 items
}

TEST_CASE("five types of five instances give one dev instance each") {
    std::vector<Instance> instances;
    for (int t = 0; t < 5; ++t) {
        for (int i = 0; i < 5; ++i) {
            Instance inst;
            inst.id = "t" + std::to_string(t) + "." + std::to_string(i);
            inst.words = {"w"};
            inst.target_index = 0;
            inst.lexelt.lemma = "t" + std::to_string(t);
            inst.gold_senses = {"s"};
            instances.push_back(inst);
        }
    }
    SplitPlan plan = make_lexical_sample_split(instances, 0.2, 3);
    std::map<std::string, std::size_t> dev_per_type;
    for (const Instance& inst : instances) {
        if (plan.bucket(inst.id) == SplitBucket::dev) {
            ++dev_per_type[inst.lexelt.lemma];
        }
    }
    CHECK(dev_per_type.size() == 5);
    for (const auto& [type, count] : dev_per_type) CHECK(count == 1);
}

TEST_CASE("a single-instance type stays in train and is flagged") {
    std::vector<Instance> instances = instances_of_one_type(1);
    SplitPlan plan = make_lexical_sample_split(instances, 0.2, 1);
    CHECK(plan.bucket("w.0") == SplitBucket::train);
    CHECK(plan.single_instance_lexelts == std::vector<std::string>{"w"});
}

TEST_CASE("split partitions are disjoint and exhaustive") {
    Corpus corpus = parse_corpus(kToyCorpus);
    SplitPlan plan = make_lexical_sample_split(corpus.instances, 0.34, 5);
    for (const Instance& inst : corpus.instances) {
        SplitBucket bucket = plan.bucket(inst.id);
        CHECK((bucket == SplitBucket::train || bucket == SplitBucket::dev));
    }
    CHECK(plan.assignment.size() == corpus.instances.size());
    CHECK_THROWS_AS(make_lexical_sample_split(corpus.instances, 0.0, 5), InputError);
    CHECK_THROWS_AS(make_lexical_sample_split(corpus.instances, 1.0, 5), InputError);
}

TEST_CASE("most frequent sense with counts, ties, and fallbacks") {
    SenseInventory inventory;
    Lexelt word{"word", std::nullopt};
    inventory.observe(word, "s1");
    inventory.observe(word, "s1");
    inventory.observe(word, "s1");
    inventory.observe(word, "s2");
    CHECK(most_frequent_sense(inventory, word) == "s1");

    SenseInventory tied;
    tied.observe(word, "s1");
    tied.observe(word, "s2");
    tied.observe(word, "s2");
    tied.observe(word, "s1");
    CHECK(most_frequent_sense(tied, word) == "s1"); // inventory order breaks the tie

    CHECK_FALSE(most_frequent_sense(inventory, Lexelt{"unseen", std::nullopt})
                    .has_value());

    // Lexelt present with zero-count senses: first inventory sense wins.
    SenseInventory listed;
    auto& entry = listed.entry_for_key("listed");
    entry.senses = {"first", "second"};
    entry.counts = {0, 0};
    CHECK(most_frequent_sense(listed, Lexelt{"listed", std::nullopt}) == "first");
}

TEST_CASE("senseval lexical-sample fixture converts to three known records") {
    std::vector<Instance> instances =
        convert_senseval_lexical_sample(slurp(fixture("senseval_ls.xml")), "fixture");
    REQUIRE(instances.size() == 3);

    CHECK(instances[0].id == "bank.n.1");
    CHECK(instances[0].lexelt == Lexelt{"bank", "n"});
    CHECK(instances[0].words ==
          std::vector<std::string>{"they", "strolled", "along", "the", "bank", "of",
                                   "the", "river"});
    CHECK(instances[0].target_index == 4);
    CHECK(instances[0].gold_senses == std::vector<std::string>{"bank%river"});

    CHECK(instances[1].id == "bank.n.2");
    CHECK(instances[1].target_index == 5);

    CHECK(instances[2].lexelt == Lexelt{"cold", "a"});
    CHECK(instances[2].target_index == 1);

    SenseInventory inventory = build_inventory(instances);
    CHECK(inventory.num_lexelts() == 2);
    CHECK(inventory.find(Lexelt{"bank", "n"})->counts ==
          std::vector<std::uint64_t>{1, 1});
}

TEST_CASE("malformed xml is rejected with a line diagnostic") {
    CHECK_THROWS_WITH_AS(
        convert_senseval_lexical_sample("<corpus>\n<lexelt>\n", "bad.xml"),
        doctest::Contains("bad.xml:2"), InputError);
}

TEST_CASE("all-words fixture carries neighbor sentences and multi-gold keys") {
    std::vector<Instance> instances = convert_unified_all_words(
        slurp(fixture("allwords.xml")), slurp(fixture("allwords.key")), "fixture");
    REQUIRE(instances.size() == 3);

    CHECK(instances[0].id == "d000.s000.t000");
    CHECK(instances[0].words == std::vector<std::string>{"The", "plant", "grows"});
    CHECK(instances[0].target_index == 1);
    CHECK_FALSE(instances[0].left_neighbor.has_value());
    CHECK(instances[0].right_neighbor ==
          std::vector<std::string>{"It", "produces", "widgets"});
    CHECK(instances[0].gold_senses == std::vector<std::string>{"plant%factory"});

    CHECK(instances[1].gold_senses ==
          std::vector<std::string>{"produce%make", "produce%create"});
    CHECK(instances[1].left_neighbor.has_value());
    CHECK(instances[1].right_neighbor.has_value());

    CHECK(instances[2].left_neighbor ==
          std::vector<std::string>{"It", "produces", "widgets"});
    CHECK_FALSE(instances[2].right_neighbor.has_value());
}
