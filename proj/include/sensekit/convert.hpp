#pragma once

#include <string>
#include <vector>

#include "sensekit/corpus.hpp"

namespace sensekit {

/// One-way converters from common benchmark distributions into native
/// records. Both parse the benchmark XML subset with a small tag scanner;
/// inputs outside that subset are rejected with a line diagnostic.

/// Lexical-sample XML: <lexelt item="lemma.pos"> blocks containing
/// <instance id=...> with <answer senseid=.../> and a whitespace-tokenized
/// <context> where <head> marks the target word. Contexts are kept as one
/// sentence; neighbor fields stay empty.
std::vector<Instance> convert_senseval_lexical_sample(const std::string& xml_text,
                                                      const std::string& origin);

/// Unified all-words XML (sentence/wf/instance elements) plus a key file
/// of "instance-id sense-id..." lines. Adjacent sentences inside each text
/// become the left/right neighbor fields.
std::vector<Instance> convert_unified_all_words(const std::string& xml_text,
                                                const std::string& key_text,
                                                const std::string& origin);

} // namespace sensekit
