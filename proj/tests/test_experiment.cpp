#include <doctest.h>

#include <filesystem>

#include "oneshot/error.hpp"
#include "oneshot/experiment.hpp"
#include "oneshot/numformat.hpp"
#include "oneshot/svg.hpp"
#include "testutil.hpp"

using namespace oneshot;

TEST_CASE("format_fixed4 rounds half to even at the 4th decimal") {
    CHECK(format_fixed4(0.96435) == "0.9644");
    CHECK(format_fixed4(0.96445) == "0.9644");
    CHECK(format_fixed4(0.96425) == "0.9642");
    CHECK(format_fixed4(0.5) == "0.5000");
    CHECK(format_fixed4(0.0) == "0.0000");
    CHECK(format_fixed4(1.0) == "1.0000");
    CHECK(format_fixed4(0.99995) == "1.0000");
    CHECK(format_fixed4(0.12341) == "0.1234");
    CHECK(format_fixed4(0.12349) == "0.1235");
}

TEST_CASE("heat_color endpoints and monotonicity") {
    CHECK(svg::heat_color(0.0) == "#ffffff");
    CHECK(svg::heat_color(1.0) == "#08306b");
    // strictly darker red channel as the value rises
    int prev = 256;
    for (double v = 0.0; v <= 1.0; v += 0.25) {
        const std::string color = svg::heat_color(v);
        const int r = std::stoi(color.substr(1, 2), nullptr, 16);
        CHECK(r < prev);
        prev = r;
    }
}

namespace {

GridConfig small_config(const testutil::ToyGridFiles& files, const std::string& out_dir,
                        int repeats) {
    GridConfig full = testutil::toy_grid_config(files, out_dir, repeats, 77);
    GridConfig small = full;
    small.datasets = {full.datasets[0]};                              // DC
    small.featurizers = {full.featurizers[0], full.featurizers[1]};   // two tfidf families
    small.models = {full.models[3], full.models[4]};                  // NBC, DTC
    return small;
}

}  // namespace

TEST_CASE("grid cell count and repeat contract") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 1);
    const GridConfig config = small_config(files, dir.file("out"), 3);

    const GridResult result = run_grid(config);
    REQUIRE(result.cells.size() == 4);  // 1 dataset x 2 featurizers x 2 models
    for (const auto& cell : result.cells) {
        REQUIRE(!cell.failed());
        CHECK(cell.repeats.size() == 3);
        // split seeds are base_seed + r
        for (std::size_t r = 0; r < cell.repeats.size(); ++r)
            CHECK(cell.repeats[r].split_seed == 77 + r);
        // means lie within [min, max] of the repeats
        CHECK(cell.accuracy.mean >= cell.accuracy.min);
        CHECK(cell.accuracy.mean <= cell.accuracy.max);
    }
}

TEST_CASE("grid results are deterministic") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 2);
    const GridConfig config = small_config(files, dir.file("out"), 2);

    const GridResult a = run_grid(config);
    const GridResult b = run_grid(config);
    CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("grid json round trip preserves emitted tables") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 3);
    const GridConfig config = small_config(files, dir.file("out"), 2);
    const GridResult result = run_grid(config);

    const GridResult restored = GridResult::from_json(result.to_json());
    emit_table(result, "DC", TableFormat::csv, dir.file("a.csv"));
    emit_table(restored, "DC", TableFormat::csv, dir.file("b.csv"));
    CHECK(testutil::read_file(dir.file("a.csv")) == testutil::read_file(dir.file("b.csv")));
}

TEST_CASE("emit_table shape and formatting") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 4);

    SUBCASE("2x2 grid gives 4 data rows in model-major order") {
        const GridConfig config = small_config(files, dir.file("out"), 1);
        const GridResult result = run_grid(config);
        emit_table(result, "DC", TableFormat::csv, dir.file("t.csv"));
        const std::string body = testutil::read_file(dir.file("t.csv"));
        std::vector<std::string> lines;
        std::size_t pos = 0;
        while (pos < body.size()) {
            const std::size_t nl = body.find('\n', pos);
            lines.push_back(body.substr(pos, nl - pos));
            pos = nl + 1;
        }
        REQUIRE(lines.size() == 5);
        CHECK(lines[0] == "Model,Features,Accuracy,Precision,Recall,F1");
        CHECK(lines[1].rfind("NBC,BoW + TF-IDF,", 0) == 0);
        CHECK(lines[2].rfind("NBC,Character n-grams,", 0) == 0);
        CHECK(lines[3].rfind("DTC,BoW + TF-IDF,", 0) == 0);
        CHECK(lines[4].rfind("DTC,Character n-grams,", 0) == 0);
        // every metric is printed with exactly 4 decimals
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::size_t comma = lines[i].find(',', lines[i].find(',') + 1);
            std::string rest = lines[i].substr(comma + 1);
            int fields = 0;
            while (!rest.empty()) {
                const std::size_t c = rest.find(',');
                const std::string field = rest.substr(0, c);
                CHECK(field.size() == 6);
                CHECK(field[1] == '.');
                ++fields;
                if (c == std::string::npos) break;
                rest = rest.substr(c + 1);
            }
            CHECK(fields == 4);
        }
    }

    SUBCASE("1x1 grid gives a single data row") {
        GridConfig config = small_config(files, dir.file("out"), 1);
        config.featurizers = {config.featurizers[0]};
        config.models = {config.models[0]};
        const GridResult result = run_grid(config);
        emit_table(result, "DC", TableFormat::markdown, dir.file("t.md"));
        const std::string body = testutil::read_file(dir.file("t.md"));
        CHECK(std::count(body.begin(), body.end(), '\n') == 3);  // header + rule + 1 row
    }

    SUBCASE("unknown dataset is rejected") {
        const GridConfig config = small_config(files, dir.file("out"), 1);
        const GridResult result = run_grid(config);
        CHECK_THROWS_WITH_AS(emit_table(result, "XX", TableFormat::csv, dir.file("t.csv")),
                             doctest::Contains("XX"), Error);
        CHECK_THROWS_AS(emit_barchart(result, "XX", dir.file("b.svg")), Error);
        CHECK_THROWS_AS(emit_heatmap(result, "XX", dir.file("h.svg")), Error);
    }
}

TEST_CASE("bar chart geometry is a pure function of the data") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 5);
    const GridConfig config = small_config(files, dir.file("out"), 2);
    const GridResult result = run_grid(config);

    emit_barchart(result, "DC", dir.file("bars.svg"));
    const std::string body = testutil::read_file(dir.file("bars.svg"));

    std::string why;
    CHECK_MESSAGE(testutil::well_formed_xml(body, &why), why);

    const auto heights = testutil::attribute_values(body, "class=\"bar\"", "height");
    REQUIRE(heights.size() == 4);  // 2 models x 2 featurizers
    const svg::BarChartLayout layout;
    std::size_t bar = 0;
    for (const auto& model : config.models) {
        for (const auto& featurizer : config.featurizers) {
            const CellResult* cell = result.find_cell("DC", featurizer.name, model.name);
            REQUIRE(cell);
            const double expected = cell->accuracy.mean * layout.plot_height;
            CHECK(std::abs(std::stod(heights[bar]) - expected) <= 0.5);
            ++bar;
        }
    }

    const auto labels = testutil::element_bodies(body, "class=\"bar-value\"");
    REQUIRE(labels.size() == 4);
    bar = 0;
    for (const auto& model : config.models) {
        for (const auto& featurizer : config.featurizers) {
            const CellResult* cell = result.find_cell("DC", featurizer.name, model.name);
            CHECK(labels[bar] == format_fixed4(cell->accuracy.mean));
            ++bar;
        }
    }
}

TEST_CASE("heatmap annotations agree with the table strings") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 6);
    const GridConfig config = small_config(files, dir.file("out"), 2);
    const GridResult result = run_grid(config);

    emit_heatmap(result, "DC", dir.file("heat.svg"));
    const std::string body = testutil::read_file(dir.file("heat.svg"));
    std::string why;
    CHECK_MESSAGE(testutil::well_formed_xml(body, &why), why);

    CHECK(testutil::attribute_values(body, "class=\"cell\"", "fill").size() == 4);
    const auto annotations = testutil::element_bodies(body, "class=\"cell-label\"");
    REQUIRE(annotations.size() == 4);
    std::size_t i = 0;
    for (const auto& model : config.models) {
        for (const auto& featurizer : config.featurizers) {
            const CellResult* cell = result.find_cell("DC", featurizer.name, model.name);
            CHECK(annotations[i] == format_fixed4(cell->accuracy.mean));
            ++i;
        }
    }
}

TEST_CASE("a failing cell is recorded without aborting the grid") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 7);
    GridConfig config = small_config(files, dir.file("out"), 2);
    config.models[1].classifier.hp.dtc_max_depth = 0;  // invalid, trips at train time

    const GridResult result = run_grid(config);
    CHECK(result.has_failures());
    int failed = 0, ok = 0;
    for (const auto& cell : result.cells) {
        if (cell.failed()) {
            ++failed;
            CHECK(cell.model == "DTC");
            CHECK(cell.error.find("dtc_max_depth") != std::string::npos);
            CHECK(cell.repeats.empty());
        } else {
            ++ok;
            CHECK(cell.repeats.size() == 2);
        }
    }
    CHECK(failed == 2);  // one per featurizer
    CHECK(ok == 2);

    // failed cells appear as 'failed' in the table, placeholders in charts
    emit_table(result, "DC", TableFormat::csv, dir.file("t.csv"));
    CHECK(testutil::read_file(dir.file("t.csv")).find("DTC,BoW + TF-IDF,failed,failed,failed,failed") !=
          std::string::npos);
    emit_barchart(result, "DC", dir.file("b.svg"));
    const std::string bars = testutil::read_file(dir.file("b.svg"));
    CHECK(testutil::attribute_values(bars, "class=\"bar\"", "height").size() == 2);
    CHECK(testutil::attribute_values(bars, "class=\"bar-missing\"", "height").size() == 2);

    // round trip keeps the error text
    const GridResult restored = GridResult::from_json(result.to_json());
    CHECK(restored.has_failures());
}

TEST_CASE("config validation fails fast") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 8);

    SUBCASE("missing vectors file is named before any cell runs") {
        GridConfig config = testutil::toy_grid_config(files, dir.file("out"), 1, 1);
        config.featurizers[2].vectors_path = dir.file("nope.bin");
        try {
            config.validate();
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("nope.bin") != std::string::npos);
        }
    }

    SUBCASE("structural requirements") {
        GridConfig config = testutil::toy_grid_config(files, dir.file("out"), 1, 1);
        config.repeats = 0;
        CHECK_THROWS_AS(config.validate(), Error);
        config = testutil::toy_grid_config(files, dir.file("out"), 1, 1);
        config.models.clear();
        CHECK_THROWS_AS(config.validate(), Error);
        config = testutil::toy_grid_config(files, dir.file("out"), 1, 1);
        config.models[1].name = config.models[0].name;
        CHECK_THROWS_AS(config.validate(), Error);
    }

    SUBCASE("unknown keys are schema errors") {
        CHECK_THROWS_WITH_AS(GridConfig::from_json(nlohmann::json{{"datasets", nlohmann::json::array()},
                                                                 {"featurizers", nlohmann::json::array()},
                                                                 {"models", nlohmann::json::array()},
                                                                 {"regeats", 3}}),
                             doctest::Contains("regeats"), Error);
    }

    SUBCASE("config json round trip") {
        const GridConfig config = testutil::toy_grid_config(files, dir.file("out"), 2, 9);
        const GridConfig back = GridConfig::from_json(config.to_json());
        CHECK(back.to_json().dump() == config.to_json().dump());
    }
}

TEST_CASE("jsonl corpora work as grid datasets") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 11);
    const Corpus dc = load_corpus(files.dc_csv, CorpusFormat::csv);
    std::string jsonl;
    for (const auto& doc : dc.documents()) {
        nlohmann::json j{{"id", doc.id}, {"text", doc.text}, {"label", doc.label}};
        jsonl += j.dump() + "\n";
    }
    testutil::write_file(dir.file("dc.jsonl"), jsonl);

    GridConfig config = small_config(files, dir.file("out"), 1);
    config.datasets = {{"DCJ", dir.file("dc.jsonl"), CorpusFormat::jsonl}};
    const GridResult result = run_grid(config);
    for (const auto& cell : result.cells) CHECK(!cell.failed());
}

TEST_CASE("vocabulary-restricted embedding load changes nothing but memory") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 12);
    GridConfig config = testutil::toy_grid_config(files, dir.file("out"), 2, 5);
    config.datasets = {config.datasets[0]};
    config.featurizers = {config.featurizers[2]};  // Word2Vec
    config.models = {config.models[3]};            // NBC
    const GridResult plain = run_grid(config);
    config.featurizers[0].restrict_vocabulary = true;
    const GridResult restricted = run_grid(config);
    REQUIRE(!plain.cells[0].failed());
    REQUIRE(!restricted.cells[0].failed());
    for (std::size_t r = 0; r < plain.cells[0].repeats.size(); ++r) {
        CHECK(restricted.cells[0].repeats[r].report.accuracy ==
              plain.cells[0].repeats[r].report.accuracy);
        CHECK(restricted.cells[0].repeats[r].report.f1 == plain.cells[0].repeats[r].report.f1);
    }
}

TEST_CASE("subword sidecar buckets work through the grid") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 13);

    // sidecar with 64 bucket vectors, dimension matching the table
    EmbeddingTable buckets(10, EmbeddingSource::word2vec);
    Rng rng(99);
    for (int b = 0; b < 64; ++b) {
        Eigen::VectorXd v(10);
        for (int k = 0; k < 10; ++k) v[k] = rng.uniform(-1.0, 1.0);
        buckets.insert(std::to_string(b), std::move(v));
    }
    const std::string sidecar = dir.file("buckets.txt");
    write_word2vec(buckets, sidecar, false);

    GridConfig config = testutil::toy_grid_config(files, dir.file("out"), 1, 3);
    config.datasets = {config.datasets[0]};
    config.featurizers = {config.featurizers[4]};  // fastText with subword on
    config.featurizers[0].subword_sidecar = sidecar;
    config.models = {config.models[3]};
    const GridResult result = run_grid(config);
    REQUIRE(!result.cells[0].failed());

    // determinism still holds with sidecar buckets
    const GridResult again = run_grid(config);
    CHECK(result.to_json().dump() == again.to_json().dump());
}

TEST_CASE("support_only fit scope runs the ablation path") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 9);
    GridConfig config = small_config(files, dir.file("out"), 2);
    config.fit_scope = FitScope::support_only;
    const GridResult result = run_grid(config);
    for (const auto& cell : result.cells) CHECK(!cell.failed());
}

TEST_CASE("write_grid_outputs creates the documented tree") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 10);
    const GridConfig config = small_config(files, dir.file("out"), 1);
    const GridResult result = run_grid(config);
    write_grid_outputs(result, config.output_dir);

    namespace fs = std::filesystem;
    for (const char* name : {"table.csv", "table.md", "accuracy_bars.svg", "accuracy_heatmap.svg"})
        CHECK(fs::exists(fs::path(config.output_dir) / "DC" / name));
    CHECK(fs::exists(fs::path(config.output_dir) / "grid.json"));
    CHECK(fs::exists(fs::path(config.output_dir) / "config_canonical.json"));
}
