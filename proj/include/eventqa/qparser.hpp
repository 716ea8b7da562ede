#pragma once

// Deterministic parser from generated question and choice text back to
// programs. The grammar is compiled from the template inventory, so it accepts
// exactly the generated language.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eventqa/program.hpp"
#include "eventqa/questions.hpp"

namespace eventqa {

struct Token {
    std::string text;    // lowercased word or "?"
    std::size_t offset;  // byte offset in the input
};

/// Lowercases, splits on anything that is not a letter or digit, and keeps "?" as a token.
std::vector<Token> tokenize(std::string_view text);

struct ParseResult {
    std::string template_id;
    Program program;
};

class Grammar {
public:
    /// Throws InputError if two templates render the same token sequence or if
    /// a branch point is not decidable from one token of lookahead.
    explicit Grammar(const TemplateSet& templates);

    /// Errors carry the index of the offending token.
    ParseResult parse_question(std::string_view text) const;
    ParseResult parse_choice(std::string_view text) const;

private:
    struct State {
        std::map<std::string, int> words;
        std::map<std::string, int> slots;  // slot name -> next state
        int accept = -1;                   // template index
    };
    struct Trie {
        std::vector<State> states{1};
        std::vector<std::string> ids;
        std::vector<std::string> programs;
    };

    static void insert(Trie& trie, const std::string& id, const std::string& text, const std::string& program);
    static void check_lookahead(const Trie& trie);
    static ParseResult run(const Trie& trie, std::string_view text);

    Trie questions_;
    Trie choices_;
};

Program parse_question(std::string_view text, const Grammar& g);
Program parse_choice(std::string_view text, const Grammar& g);

/// Grammar over default_templates(), built once.
const Grammar& default_grammar();

}  // namespace eventqa
