#include "sensekit/convert.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "sensekit/errors.hpp"

namespace sensekit {

namespace {

std::string decode_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        auto matches = [&](const char* entity) {
            return text.compare(i, std::string::traits_type::length(entity), entity) == 0;
        };
        if (matches("&amp;")) { out.push_back('&'); i += 5; }
        else if (matches("&lt;")) { out.push_back('<'); i += 4; }
        else if (matches("&gt;")) { out.push_back('>'); i += 4; }
        else if (matches("&quot;")) { out.push_back('"'); i += 6; }
        else if (matches("&apos;")) { out.push_back('\''); i += 6; }
        else { out.push_back(text[i++]); }
    }
    return out;
}

struct XmlEvent {
    enum class Kind { open, close, text } kind = Kind::text;
    std::string name;                        // open/close
    std::map<std::string, std::string> attrs; // open
    bool self_closing = false;               // open
    std::string text;                        // text
    std::size_t line = 0;
};

// Minimal scanner for the benchmark subset: tags, attributes, text.
// Comments, doctypes and processing instructions are skipped.
class XmlScanner {
public:
    XmlScanner(const std::string& text, std::string origin)
        : text_(text), origin_(std::move(origin)) {}

    std::optional<XmlEvent> next() {
        while (pos_ < text_.size()) {
            if (text_[pos_] != '<') {
                std::size_t start = pos_;
                std::size_t line = line_;
                while (pos_ < text_.size() && text_[pos_] != '<') advance();
                std::string chunk = text_.substr(start, pos_ - start);
                if (chunk.find_first_not_of(" \t\r\n") == std::string::npos) continue;
                XmlEvent event;
                event.kind = XmlEvent::Kind::text;
                event.text = decode_entities(chunk);
                event.line = line;
                return event;
            }
            if (starts_with("<?") || starts_with("<!")) {
                skip_until('>');
                continue;
            }
            return read_tag();
        }
        return std::nullopt;
    }

    [[noreturn]] void fail(const std::string& message, std::size_t line) const {
        throw InputError(origin_ + ":" + std::to_string(line) + ": " + message);
    }

private:
    void advance() {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
    }

    bool starts_with(const char* prefix) const {
        return text_.compare(pos_, std::string::traits_type::length(prefix), prefix) == 0;
    }

    void skip_until(char terminator) {
        while (pos_ < text_.size() && text_[pos_] != terminator) advance();
        if (pos_ < text_.size()) advance();
    }

    XmlEvent read_tag() {
        std::size_t line = line_;
        advance(); // consume '<'
        XmlEvent event;
        event.line = line;
        if (pos_ < text_.size() && text_[pos_] == '/') {
            advance();
            event.kind = XmlEvent::Kind::close;
        } else {
            event.kind = XmlEvent::Kind::open;
        }
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '>' && text_[pos_] != '/') {
            event.name.push_back(text_[pos_]);
            advance();
        }
        if (event.name.empty()) fail("empty tag name", line);

        while (pos_ < text_.size() && text_[pos_] != '>') {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                advance();
                continue;
            }
            if (text_[pos_] == '/') {
                event.self_closing = true;
                advance();
                continue;
            }
            std::string key;
            while (pos_ < text_.size() && text_[pos_] != '=' &&
                   !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
                   text_[pos_] != '>') {
                key.push_back(text_[pos_]);
                advance();
            }
            while (pos_ < text_.size() &&
                   (std::isspace(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '=')) {
                advance();
            }
            if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
                fail("attribute '" + key + "' has no quoted value", line);
            }
            char quote = text_[pos_];
            advance();
            std::string value;
            while (pos_ < text_.size() && text_[pos_] != quote) {
                value.push_back(text_[pos_]);
                advance();
            }
            if (pos_ >= text_.size()) fail("unterminated attribute value", line);
            advance(); // closing quote
            event.attrs[key] = decode_entities(value);
        }
        if (pos_ >= text_.size()) fail("unterminated tag '" + event.name + "'", line);
        advance(); // consume '>'
        return event;
    }

    const std::string& text_;
    std::string origin_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream stream(text);
    std::string token;
    while (stream >> token) out.push_back(token);
    return out;
}

Lexelt lexelt_from_item(const std::string& item) {
    Lexelt lexelt;
    std::size_t dot = item.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= item.size()) {
        lexelt.lemma = item;
    } else {
        lexelt.lemma = item.substr(0, dot);
        lexelt.pos = item.substr(dot + 1);
    }
    return lexelt;
}

} // namespace

std::vector<Instance> convert_senseval_lexical_sample(const std::string& xml_text,
                                                      const std::string& origin) {
    XmlScanner scanner(xml_text, origin);
    std::vector<Instance> instances;

    Lexelt current_lexelt;
    bool in_lexelt = false;
    Instance current;
    bool in_instance = false;
    bool in_context = false;
    bool in_head = false;
    bool have_head = false;
    std::size_t head_index = 0;
    std::size_t instance_line = 0;

    while (auto event = scanner.next()) {
        switch (event->kind) {
        case XmlEvent::Kind::open:
            if (event->name == "lexelt") {
                auto it = event->attrs.find("item");
                if (it == event->attrs.end()) {
                    scanner.fail("lexelt without item attribute", event->line);
                }
                current_lexelt = lexelt_from_item(it->second);
                in_lexelt = true;
            } else if (event->name == "instance") {
                if (!in_lexelt) scanner.fail("instance outside lexelt", event->line);
                current = Instance{};
                current.lexelt = current_lexelt;
                auto it = event->attrs.find("id");
                if (it == event->attrs.end()) {
                    scanner.fail("instance without id attribute", event->line);
                }
                current.id = it->second;
                in_instance = true;
                have_head = false;
                instance_line = event->line;
            } else if (event->name == "answer") {
                if (!in_instance) scanner.fail("answer outside instance", event->line);
                auto it = event->attrs.find("senseid");
                if (it == event->attrs.end()) {
                    scanner.fail("answer without senseid attribute", event->line);
                }
                current.gold_senses.push_back(it->second);
            } else if (event->name == "context") {
                if (!in_instance) scanner.fail("context outside instance", event->line);
                in_context = true;
            } else if (event->name == "head") {
                if (!in_context) scanner.fail("head outside context", event->line);
                in_head = true;
            }
            break;
        case XmlEvent::Kind::text:
            if (in_context) {
                std::vector<std::string> tokens = whitespace_tokens(event->text);
                if (in_head) {
                    if (tokens.empty()) {
                        scanner.fail("empty head element", event->line);
                    }
                    head_index = current.words.size();
                    have_head = true;
                }
                current.words.insert(current.words.end(), tokens.begin(), tokens.end());
            }
            break;
        case XmlEvent::Kind::close:
            if (event->name == "head") {
                in_head = false;
            } else if (event->name == "context") {
                in_context = false;
            } else if (event->name == "instance") {
                if (!have_head) {
                    scanner.fail("instance '" + current.id + "' has no head word",
                                 instance_line);
                }
                if (current.words.empty()) {
                    scanner.fail("instance '" + current.id + "' has an empty context",
                                 instance_line);
                }
                current.target_index = head_index;
                instances.push_back(current);
                in_instance = false;
            } else if (event->name == "lexelt") {
                in_lexelt = false;
            }
            break;
        }
    }
    if (in_instance || in_context) {
        scanner.fail("unexpected end of file inside an instance", instance_line);
    }
    return instances;
}

std::vector<Instance> convert_unified_all_words(const std::string& xml_text,
                                                const std::string& key_text,
                                                const std::string& origin) {
    // Key file: "instance-id sense [sense...]" per line.
    std::map<std::string, std::vector<std::string>> keys;
    {
        std::istringstream stream(key_text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(stream, line)) {
            ++line_no;
            std::vector<std::string> tokens = whitespace_tokens(line);
            if (tokens.empty()) continue;
            if (tokens.size() < 2) {
                throw InputError(origin + " keys:" + std::to_string(line_no) +
                                 ": expected 'instance-id sense...'");
            }
            keys[tokens[0]] = {tokens.begin() + 1, tokens.end()};
        }
    }

    struct PendingTarget {
        std::string id;
        std::size_t word_index;
        Lexelt lexelt;
    };
    struct Sentence {
        std::vector<std::string> words;
        std::vector<PendingTarget> targets;
    };

    XmlScanner scanner(xml_text, origin);
    std::vector<Instance> instances;
    std::vector<Sentence> sentences; // within the current text
    Sentence current;
    bool in_sentence = false;
    std::optional<PendingTarget> open_target;

    auto flush_text = [&]() {
        for (std::size_t s = 0; s < sentences.size(); ++s) {
            for (const PendingTarget& target : sentences[s].targets) {
                Instance inst;
                inst.id = target.id;
                inst.words = sentences[s].words;
                inst.target_index = target.word_index;
                inst.lexelt = target.lexelt;
                auto it = keys.find(target.id);
                if (it != keys.end()) inst.gold_senses = it->second;
                if (s > 0) inst.left_neighbor = sentences[s - 1].words;
                if (s + 1 < sentences.size()) {
                    inst.right_neighbor = sentences[s + 1].words;
                }
                instances.push_back(std::move(inst));
            }
        }
        sentences.clear();
    };

    while (auto event = scanner.next()) {
        switch (event->kind) {
        case XmlEvent::Kind::open:
            if (event->name == "sentence") {
                current = Sentence{};
                in_sentence = true;
            } else if (event->name == "wf" || event->name == "instance") {
                if (!in_sentence) {
                    scanner.fail(event->name + " outside sentence", event->line);
                }
                if (event->name == "instance") {
                    PendingTarget target;
                    auto id = event->attrs.find("id");
                    auto lemma = event->attrs.find("lemma");
                    if (id == event->attrs.end() || lemma == event->attrs.end()) {
                        scanner.fail("instance needs id and lemma attributes",
                                     event->line);
                    }
                    target.id = id->second;
                    target.lexelt.lemma = lemma->second;
                    auto pos = event->attrs.find("pos");
                    if (pos != event->attrs.end()) target.lexelt.pos = pos->second;
                    target.word_index = current.words.size();
                    open_target = target;
                }
            }
            break;
        case XmlEvent::Kind::text:
            if (in_sentence) {
                std::vector<std::string> tokens = whitespace_tokens(event->text);
                // Multi-word surface forms stay one aligned token.
                if (!tokens.empty()) {
                    std::string joined = tokens[0];
                    for (std::size_t i = 1; i < tokens.size(); ++i) {
                        joined += "_" + tokens[i];
                    }
                    current.words.push_back(joined);
                }
            }
            break;
        case XmlEvent::Kind::close:
            if (event->name == "instance" && open_target) {
                current.targets.push_back(*open_target);
                open_target.reset();
            } else if (event->name == "sentence") {
                if (!current.words.empty()) sentences.push_back(std::move(current));
                in_sentence = false;
            } else if (event->name == "text") {
                flush_text();
            }
            break;
        }
    }
    flush_text();
    return instances;
}

} // namespace sensekit
