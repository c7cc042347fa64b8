#include <doctest.h>

#include "oneshot/error.hpp"
#include "oneshot/tokenize.hpp"

using namespace oneshot;

TEST_CASE("word_tokenize basic") {
    NormConfig cfg;
    CHECK(word_tokenize("The doctor advised rest.", cfg) ==
          std::vector<std::string>{"the", "doctor", "advised", "rest"});
    // single-character tokens dropped
    CHECK(word_tokenize("A B C", cfg).empty());
    CHECK(word_tokenize("Take 2 tablets, twice daily", cfg) ==
          std::vector<std::string>{"take", "tablets", "twice", "daily"});
    CHECK(word_tokenize("", cfg).empty());
    CHECK(word_tokenize("...!!!", cfg).empty());
}

TEST_CASE("word_tokenize unicode") {
    NormConfig cfg;
    CHECK(word_tokenize("Crème brûlée!", cfg) == std::vector<std::string>{"crème", "brûlée"});
    cfg.strip_accents = true;
    CHECK(word_tokenize("Crème brûlée!", cfg) == std::vector<std::string>{"creme", "brulee"});
}

TEST_CASE("char_ngrams enumerates windows by length then position") {
    NormConfig cfg;
    CHECK(char_ngrams("doctor", 3, 3, cfg) ==
          std::vector<std::string>{"doc", "oct", "cto", "tor"});
    CHECK(char_ngrams("ab", 3, 3, cfg).empty());
    CHECK(char_ngrams("a bc", 2, 3, cfg) ==
          std::vector<std::string>{"a ", " b", "bc", "a b", " bc"});
}

TEST_CASE("char_ngrams rejects bad ranges") {
    NormConfig cfg;
    CHECK_THROWS_AS(char_ngrams("abc", 0, 3, cfg), Error);
    CHECK_THROWS_AS(char_ngrams("abc", 3, 2, cfg), Error);
    CHECK_THROWS_AS(char_ngrams("abc", 1, 9, cfg), Error);
}

TEST_CASE("n-gram count formula holds") {
    NormConfig cfg;
    const std::string texts[] = {"hello world", "a", "", "take twice daily after meals",
                                 "ñandú çedilla"};
    for (const auto& text : texts) {
        const auto norm = normalize(text, cfg);
        const auto len = static_cast<long>(unicode::decode_utf8(norm).size());
        for (int n_min = 1; n_min <= 4; ++n_min) {
            for (int n_max = n_min; n_max <= 5; ++n_max) {
                long expected = 0;
                for (int n = n_min; n <= n_max; ++n) expected += std::max(0L, len - n + 1);
                CHECK(static_cast<long>(char_ngrams(text, n_min, n_max, cfg).size()) == expected);
            }
        }
    }
}

TEST_CASE("normalization is idempotent") {
    const std::string texts[] = {"  The   Doctor\tAdvised\n REST  ", "Crème BRÛLÉE  twice",
                                 "already normalized text"};
    for (bool strip : {false, true}) {
        NormConfig cfg;
        cfg.strip_accents = strip;
        for (const auto& text : texts) {
            const std::string once = normalize(text, cfg);
            CHECK(normalize(once, cfg) == once);
        }
    }
}

TEST_CASE("collapse_whitespace merges runs and trims") {
    NormConfig cfg;
    CHECK(normalize(" a \t\n b ", cfg) == "a b");
    cfg.collapse_whitespace = false;
    CHECK(normalize(" a  b ", cfg) == " a  b ");
}
