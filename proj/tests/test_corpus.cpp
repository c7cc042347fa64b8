#include <doctest.h>

#include <set>
#include <sstream>

#include "oneshot/corpus.hpp"
#include "oneshot/csv.hpp"
#include "oneshot/error.hpp"
#include "testutil.hpp"

using namespace oneshot;

TEST_CASE("csv reader handles rfc4180 quoting") {
    std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\nd,\"line\nbreak\",e\n");
    csv::Reader reader(in);
    std::size_t line = 0;
    auto r1 = reader.next(line);
    REQUIRE(r1.has_value());
    CHECK(line == 1);
    CHECK(*r1 == std::vector<std::string>{"a", "b,c", "say \"hi\""});
    auto r2 = reader.next(line);
    REQUIRE(r2.has_value());
    CHECK(line == 2);
    CHECK(*r2 == std::vector<std::string>{"d", "line\nbreak", "e"});
    CHECK(!reader.next(line).has_value());
}

TEST_CASE("csv writer round-trips tricky fields") {
    std::ostringstream out;
    const std::vector<std::string> fields = {"plain", "with,comma", "with\nnewline", "wi\"th"};
    csv::write_record(out, fields);
    std::istringstream in(out.str());
    csv::Reader reader(in);
    std::size_t line = 0;
    CHECK(*reader.next(line) == fields);
}

TEST_CASE("load_corpus minimal csv") {
    testutil::TempDir dir;
    const std::string path = dir.file("c.csv");
    testutil::write_file(path,
                         "id,text,label\n"
                         "r1,patient should rest,doctor\n"
                         "r2,thank you for asking,chatgpt\n"
                         "r3,take fluids,doctor\n"
                         "r4,i recommend a consult,chatgpt\n");
    const Corpus c = load_corpus(path, CorpusFormat::csv);
    CHECK(c.size() == 4);
    CHECK(c.labels() == std::vector<std::string>{"doctor", "chatgpt"});
    CHECK(c.documents()[2].id == "r3");
}

TEST_CASE("load_corpus jsonl") {
    testutil::TempDir dir;
    const std::string path = dir.file("c.jsonl");
    testutil::write_file(path,
                         "{\"id\":\"a1\",\"text\":\"rest and fluids\",\"label\":\"doctor\"}\n"
                         "{\"id\":\"a2\",\"text\":\"please consult\",\"label\":\"chatgpt\"}\n"
                         "{\"id\":\"a3\",\"text\":\"take tablets\",\"label\":\"doctor\"}\n"
                         "{\"id\":\"a4\",\"text\":\"happy to help\",\"label\":\"chatgpt\"}\n");
    CHECK(load_corpus(path, CorpusFormat::jsonl).size() == 4);
    CHECK(corpus_format_from_path(path) == CorpusFormat::jsonl);
}

TEST_CASE("load_corpus errors carry row numbers") {
    testutil::TempDir dir;

    SUBCASE("duplicate id names both rows") {
        const std::string path = dir.file("dup.csv");
        testutil::write_file(path,
                             "id,text,label\n"
                             "r7,first,a\n"
                             "x,second,a\n"
                             "r7,third,b\n"
                             "y,fourth,b\n");
        try {
            load_corpus(path, CorpusFormat::csv);
            FAIL("expected error");
        } catch (const Error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("r7") != std::string::npos);
            CHECK(msg.find("2") != std::string::npos);
            CHECK(msg.find("4") != std::string::npos);
        }
    }

    SUBCASE("empty text after trimming") {
        const std::string path = dir.file("empty.csv");
        testutil::write_file(path, "id,text,label\nr1,\"  \n \",a\nr2,ok,a\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::csv),
                             doctest::Contains("empty text"), Error);
    }

    SUBCASE("missing field") {
        const std::string path = dir.file("missing.csv");
        testutil::write_file(path, "id,text,label\nr1,only-two\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::csv),
                             doctest::Contains("expected 3 fields"), Error);
    }

    SUBCASE("jsonl missing key names the line") {
        const std::string path = dir.file("m.jsonl");
        testutil::write_file(path, "{\"id\":\"a\",\"text\":\"x y\",\"label\":\"l\"}\n"
                                   "{\"id\":\"b\",\"text\":\"x y\"}\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::jsonl),
                             doctest::Contains("line 2"), Error);
    }

    SUBCASE("label below the minimum count") {
        const std::string path = dir.file("single.csv");
        testutil::write_file(path, "id,text,label\nr1,alpha beta,a\nr2,gamma delta,a\nr3,lonely,b\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::csv), doctest::Contains("'b'"),
                             Error);
        LoadOptions relaxed;
        relaxed.min_label_count = 1;
        CHECK(load_corpus(path, CorpusFormat::csv, relaxed).size() == 3);
    }
}

TEST_CASE("full-scale dc file loads with the right shape") {
    testutil::TempDir dir;
    const std::string path = dir.file("dc.csv");
    std::string body = "id,text,label\n";
    for (int i = 0; i < 1880; ++i) {
        body += "d" + std::to_string(i) + ",doctor response " + std::to_string(i) + ",doctor\n";
        body += "c" + std::to_string(i) + ",chat response " + std::to_string(i) + ",chatgpt\n";
    }
    testutil::write_file(path, body);
    const Corpus c = load_corpus(path, CorpusFormat::csv);
    CHECK(c.size() == 3760);
    CHECK(c.labels().size() == 2);
}

TEST_CASE("save_corpus_csv round-trips") {
    testutil::TempDir dir;
    std::vector<Document> docs = {{"a", "text, with comma", "l1"},
                                  {"b", "quote \" inside", "l2"},
                                  {"c", "plain", "l1"},
                                  {"d", "more", "l2"}};
    const Corpus corpus("x", docs);
    const std::string path = dir.file("out.csv");
    save_corpus_csv(corpus, path);
    const Corpus back = load_corpus(path, CorpusFormat::csv);
    REQUIRE(back.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        CHECK(back.documents()[i].id == docs[i].id);
        CHECK(back.documents()[i].text == docs[i].text);
        CHECK(back.documents()[i].label == docs[i].label);
    }
}

namespace {

ThreeWaySource tiny_source(int rows) {
    ThreeWaySource source;
    for (int i = 0; i < rows; ++i) {
        source.rows.push_back({"r" + std::to_string(i), "doc text " + std::to_string(i),
                               "chat text " + std::to_string(i),
                               "rephrased text " + std::to_string(i)});
    }
    return source;
}

}  // namespace

TEST_CASE("build_tasks sizes are exact linear functions of row count") {
    const TaskSet one = build_tasks(tiny_source(1));
    CHECK(one.dcr.size() == 3);
    CHECK(one.dcr.labels().size() == 3);

    const TaskSet two = build_tasks(tiny_source(2));
    CHECK(two.dc.labels() == std::vector<std::string>{"doctor", "chatgpt"});
    int doctor = 0, chatgpt = 0;
    for (const auto& doc : two.dc.documents()) {
        doctor += doc.label == "doctor";
        chatgpt += doc.label == "chatgpt";
    }
    CHECK(doctor == 2);
    CHECK(chatgpt == 2);

    const TaskSet big = build_tasks(tiny_source(1880));
    CHECK(big.dc.size() == 3760);
    CHECK(big.dr.size() == 3760);
    CHECK(big.dcr.size() == 5640);

    // ids are suffixed with the source role and stay unique
    std::set<std::string> ids;
    for (const auto& doc : big.dcr.documents()) ids.insert(doc.id);
    CHECK(ids.size() == 5640);
}

TEST_CASE("load_three_way_source validates rows") {
    testutil::TempDir dir;
    const std::string path = dir.file("src.csv");
    testutil::write_file(path, "id,doctor,chatgpt,rephrased\nr1,a b,c d,e f\nr2,x,,z\n");
    CHECK_THROWS_WITH_AS(load_three_way_source(path, CorpusFormat::csv),
                         doctest::Contains("chatgpt"), Error);
}

TEST_CASE("one_shot_split counts and determinism") {
    std::vector<Document> docs = {{"1", "a a", "x"}, {"2", "b b", "y"},
                                  {"3", "c c", "x"}, {"4", "d d", "y"}};
    const Corpus corpus("c", docs);

    const OneShotSplit split = one_shot_split(corpus, 123);
    CHECK(split.support.size() == 2);
    CHECK(split.query.size() == 2);

    const OneShotSplit again = one_shot_split(corpus, 123);
    REQUIRE(again.support.size() == split.support.size());
    for (std::size_t i = 0; i < split.support.size(); ++i)
        CHECK(again.support[i].id == split.support[i].id);
    for (std::size_t i = 0; i < split.query.size(); ++i)
        CHECK(again.query[i].id == split.query[i].id);
}

TEST_CASE("one_shot_split partitions for every seed") {
    const Corpus corpus = testutil::disjoint_vocab_corpus(5, 6, 11);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const OneShotSplit split = one_shot_split(corpus, seed);
        CHECK(split.support.size() == corpus.labels().size());

        std::set<std::string> support_labels;
        for (const auto& doc : split.support) support_labels.insert(doc.label);
        CHECK(support_labels.size() == corpus.labels().size());

        std::set<std::string> ids;
        for (const auto& doc : split.support) ids.insert(doc.id);
        for (const auto& doc : split.query) ids.insert(doc.id);
        CHECK(ids.size() == corpus.size());
        CHECK(split.support.size() + split.query.size() == corpus.size());
    }
}

TEST_CASE("one_shot_split on a dcr-sized corpus") {
    std::vector<Document> docs;
    for (int i = 0; i < 1880; ++i) {
        docs.push_back({"d" + std::to_string(i), "t", "doctor"});
        docs.push_back({"c" + std::to_string(i), "t", "chatgpt"});
        docs.push_back({"r" + std::to_string(i), "t", "rephrased"});
    }
    const Corpus corpus("dcr", docs);
    const OneShotSplit split = one_shot_split(corpus, 7);
    CHECK(split.support.size() == 3);
    CHECK(split.query.size() == 5637);
}

TEST_CASE("one_shot_split rejects single-document labels") {
    std::vector<Document> docs = {{"1", "a", "x"}, {"2", "b", "y"}, {"3", "c", "x"}};
    const Corpus corpus("c", docs);
    CHECK_THROWS_WITH_AS(one_shot_split(corpus, 1), doctest::Contains("'y'"), Error);
}
