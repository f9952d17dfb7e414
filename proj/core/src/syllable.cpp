#include "hkg/syllable.hpp"

#include <cctype>

#include "hkg/textio.hpp"

namespace hkg {
namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char to_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = to_lower(c);
    return out;
}

bool is_vowel(char c, bool word_initial) {
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return true;
        case 'y':
            return !word_initial;
        default:
            return false;
    }
}

// Vowel-group heuristic over a lowercase alphabetic word.
int heuristic_count(const std::string& w) {
    int groups = 0;
    bool in_group = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_vowel(w[i], i == 0)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == 'e') {
        bool consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3], n == 3);
        if (!consonant_le) --groups;
    }
    return groups < 1 ? 1 : groups;
}

// One hyphen part: strip non-alphabetic edges, keep interior punctuation as
// group breakers ("hawk's" -> 1), then lexicon or heuristic.
int count_part(const std::string& part, const SyllableLexicon& lex, bool* ok) {
    std::size_t b = 0;
    std::size_t e = part.size();
    while (b < e && !is_alpha(part[b])) ++b;
    while (e > b && !is_alpha(part[e - 1])) --e;
    if (b == e) {
        *ok = false;
        return 0;
    }
    std::string w = lowercase(part.substr(b, e - b));
    if (int lexed = lex.lookup(w); lexed > 0) {
        *ok = true;
        return lexed;
    }
    *ok = true;
    return heuristic_count(w);
}

}  // namespace

SyllableLexicon SyllableLexicon::load(const std::filesystem::path& path) {
    SyllableLexicon lex;
    for (const std::string& raw : split_lines(read_file(path))) {
        std::string line = raw.substr(0, raw.find('#'));
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 2)
            throw DataError("lexicon line needs 'word count': '" + raw + "'");
        long long n = parse_int(fields[1]);
        if (n < 1) throw DataError("lexicon count must be >= 1: '" + raw + "'");
        lex.add(fields[0], static_cast<int>(n));
    }
    return lex;
}

void SyllableLexicon::add(std::string word, int count) {
    overrides_[lowercase(word)] = count;
}

int SyllableLexicon::lookup(const std::string& lowercase_word) const {
    auto it = overrides_.find(lowercase_word);
    return it == overrides_.end() ? 0 : it->second;
}

int count_word(const std::string& word, const SyllableLexicon& lex) {
    // Whole-word override wins before any hyphen splitting.
    if (int lexed = lex.lookup(lowercase(word)); lexed > 0) return lexed;

    int total = 0;
    bool any = false;
    std::size_t start = 0;
    while (start <= word.size()) {
        std::size_t dash = word.find('-', start);
        std::string part =
            dash == std::string::npos ? word.substr(start) : word.substr(start, dash - start);
        bool ok = false;
        int n = count_part(part, lex, &ok);
        if (ok) {
            total += n;
            any = true;
        }
        if (dash == std::string::npos) break;
        start = dash + 1;
    }
    if (!any) throw ModelError("not_a_word: '" + word + "'");
    return total;
}

int count_token_lenient(const std::string& token, const SyllableLexicon& lex,
                        std::size_t* fallbacks) {
    try {
        return count_word(token, lex);
    } catch (const ModelError&) {
        if (fallbacks) ++*fallbacks;
        return 1;
    }
}

int count_line(const std::string& line, const SyllableLexicon& lex, std::size_t* fallbacks) {
    int total = 0;
    for (const std::string& tok : split_ws(line)) total += count_token_lenient(tok, lex, fallbacks);
    return total;
}

}  // namespace hkg
