#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>

namespace hkg {

// Per-word syllable counts that the rule engine gets wrong. File format:
// one "word count" per line, '#' starts a comment. Lookups are
// case-insensitive.
class SyllableLexicon {
public:
    SyllableLexicon() = default;

    static SyllableLexicon load(const std::filesystem::path& path);

    void add(std::string word, int count);

    // Returns 0 when the word has no override.
    int lookup(const std::string& lowercase_word) const;

    std::size_t size() const { return overrides_.size(); }

private:
    std::unordered_map<std::string, int> overrides_;
};

// Syllables in one word. Lexicon override first, then a vowel-group count:
// maximal runs of [aeiouy] ('y' is a consonant word-initially), minus a silent
// terminal 'e' unless the word ends in consonant+"le", floor 1. Hyphenated
// words are counted per part and summed. Throws ModelError when the token has
// no alphabetic content.
int count_word(const std::string& word, const SyllableLexicon& lex);

// count_word with the unparseable-token fallback of 1. `fallbacks`, when
// given, counts how often the fallback fired.
int count_token_lenient(const std::string& token, const SyllableLexicon& lex,
                        std::size_t* fallbacks = nullptr);

// Sum over whitespace tokens; total function, "" -> 0.
int count_line(const std::string& line, const SyllableLexicon& lex,
               std::size_t* fallbacks = nullptr);

}  // namespace hkg
