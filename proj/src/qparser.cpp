#include "eventqa/qparser.hpp"

#include <cctype>
#include <set>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

bool is_slot_element(const std::string& e) { return !e.empty() && e.front() == '<'; }

std::string slot_name(const std::string& e) { return e.substr(1, e.size() - 2); }

// Like tokenize(), but `<NAME>` stays a single element.
std::vector<std::string> pattern_elements(std::string_view pattern) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const char c = pattern[i];
        if (c == '<') {
            flush();
            const auto close = pattern.find('>', i);
            if (close == std::string_view::npos) throw InputError("unterminated slot in '" + std::string(pattern) + "'");
            out.emplace_back(pattern.substr(i, close - i + 1));
            i = close;
        } else if (std::isalnum(static_cast<unsigned char>(c))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
            if (c == '?') out.emplace_back("?");
        }
    }
    flush();
    return out;
}

const std::set<std::string>& object_first() {
    static const std::set<std::string> words = [] {
        std::set<std::string> s;
        for (auto c : kAllColors) s.emplace(to_string(c));
        for (auto m : kAllMaterials) s.emplace(to_string(m));
        for (auto sh : kAllShapes) s.emplace(to_string(sh));
        return s;
    }();
    return words;
}

const std::set<std::string>& order_first() {
    static const std::set<std::string> words = {"first", "second", "last"};
    return words;
}

const std::set<std::string>& first_set(const std::string& slot) {
    return slot == "ORD" ? order_first() : object_first();
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::string word;
    std::size_t start = 0;
    auto flush = [&] {
        if (!word.empty()) out.push_back({std::move(word), start});
        word.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isalnum(static_cast<unsigned char>(c))) {
            if (word.empty()) start = i;
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
            if (c == '?') out.push_back({"?", i});
        }
    }
    flush();
    return out;
}

Grammar::Grammar(const TemplateSet& templates) {
    for (const auto& t : templates.questions) insert(questions_, t.id, t.text, t.program);
    for (const auto& t : templates.choices) insert(choices_, t.id, t.text, t.program);
    check_lookahead(questions_);
    check_lookahead(choices_);
}

void Grammar::insert(Trie& trie, const std::string& id, const std::string& text, const std::string& program) {
    int state = 0;
    for (const auto& e : pattern_elements(text)) {
        auto& edges = is_slot_element(e) ? trie.states[static_cast<std::size_t>(state)].slots
                                         : trie.states[static_cast<std::size_t>(state)].words;
        const std::string key = is_slot_element(e) ? slot_name(e) : e;
        auto it = edges.find(key);
        if (it == edges.end()) {
            const int next = static_cast<int>(trie.states.size());
            edges.emplace(key, next);
            trie.states.emplace_back();
            state = next;
        } else {
            state = it->second;
        }
    }
    int& accept = trie.states[static_cast<std::size_t>(state)].accept;
    if (accept >= 0)
        throw InputError("templates " + trie.ids[static_cast<std::size_t>(accept)] + " and " + id +
                         " have the same wording");
    accept = static_cast<int>(trie.ids.size());
    trie.ids.push_back(id);
    trie.programs.push_back(program);
}

void Grammar::check_lookahead(const Trie& trie) {
    for (const auto& s : trie.states) {
        std::set<std::string> seen;
        for (const auto& [word, next] : s.words) seen.insert(word);
        for (const auto& [slot, next] : s.slots) {
            for (const auto& w : first_set(slot))
                if (!seen.insert(w).second)
                    throw InputError("grammar is ambiguous: '" + w + "' can start slot <" + slot +
                                     "> and another branch at the same point");
        }
    }
}

ParseResult Grammar::run(const Trie& trie, std::string_view text) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw ParseError(0, "empty input");
    std::size_t pos = 0;
    int state = 0;
    SlotValues values;

    auto fail = [&](const std::string& what) -> void {
        const std::string got = pos < tokens.size() ? "'" + tokens[pos].text + "'" : "end of input";
        throw ParseError(pos, "token " + std::to_string(pos) + ": " + what + ", got " + got);
    };
    auto peek = [&]() -> const std::string* { return pos < tokens.size() ? &tokens[pos].text : nullptr; };

    for (;;) {
        const State& s = trie.states[static_cast<std::size_t>(state)];
        const std::string* tok = peek();
        if (!tok) {
            if (s.accept < 0) fail("unexpected end of input");
            break;
        }
        if (auto it = s.words.find(*tok); it != s.words.end()) {
            ++pos;
            state = it->second;
            continue;
        }
        bool matched = false;
        for (const auto& [slot, next] : s.slots) {
            if (!first_set(slot).count(*tok)) continue;
            if (slot == "ORD") {
                values.orders[slot] = *parse_order(*tok);
                ++pos;
            } else {
                ObjectDescription d;
                if (auto c = parse_color(*tok)) {
                    d.color = c;
                    ++pos;
                }
                if (const std::string* t = peek(); t && parse_material(*t)) {
                    d.material = parse_material(*t);
                    ++pos;
                }
                const std::string* t = peek();
                if (t && parse_shape(*t)) {
                    d.shape = parse_shape(*t);
                    ++pos;
                } else if (t && *t == "object" && (d.color || d.material)) {
                    ++pos;
                } else {
                    fail("expected a shape or 'object' to end the object reference");
                }
                values.objects[slot] = d;
            }
            state = next;
            matched = true;
            break;
        }
        if (matched) continue;

        std::string expected;
        for (const auto& [word, next] : s.words) expected += (expected.empty() ? "" : ", ") + ("'" + word + "'");
        for (const auto& [slot, next] : s.slots)
            expected += (expected.empty() ? "" : ", ") + std::string(slot == "ORD" ? "an ordinal" : "an object");
        if (s.accept >= 0) expected += (expected.empty() ? "" : ", ") + std::string("end of input");
        fail("expected " + expected);
    }

    const auto index = static_cast<std::size_t>(trie.states[static_cast<std::size_t>(state)].accept);
    return {trie.ids[index], instantiate_program(trie.programs[index], values)};
}

ParseResult Grammar::parse_question(std::string_view text) const { return run(questions_, text); }
ParseResult Grammar::parse_choice(std::string_view text) const { return run(choices_, text); }

Program parse_question(std::string_view text, const Grammar& g) { return g.parse_question(text).program; }
Program parse_choice(std::string_view text, const Grammar& g) { return g.parse_choice(text).program; }

const Grammar& default_grammar() {
    static const Grammar g(default_templates());
    return g;
}

}  // namespace eventqa
