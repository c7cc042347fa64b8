#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("ONESHOT_CLI");
    REQUIRE_MESSAGE(env != nullptr, "ONESHOT_CLI must point at the built binary");
    return env;
}

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr interleaved
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string toy_config_file(const testutil::TempDir& dir, const testutil::ToyGridFiles& files,
                            int repeats, const std::string& out_dir,
                            const std::string& breakage = "") {
    oneshot::GridConfig config = testutil::toy_grid_config(files, out_dir, repeats, 13);
    // a small grid keeps the cli tests quick
    config.featurizers = {config.featurizers[0], config.featurizers[2]};
    config.models = {config.models[3], config.models[4]};
    nlohmann::json j = config.to_json();
    if (breakage == "missing-vectors") j["featurizers"][1]["vectors"] = dir.file("missing.bin");
    if (breakage == "bad-hyperparam") j["models"][1]["hyperparams"]["dtc_max_depth"] = 0;
    const std::string path = dir.file("config.json");
    testutil::write_file(path, j.dump(2));
    return path;
}

}  // namespace

TEST_CASE("split-tasks writes the three corpora and honors --force") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("src.csv"),
                         "id,doctor,chatgpt,rephrased\n"
                         "r0,rest and fluids,happy to help,please hydrate\n"
                         "r1,take the tablet,consult a provider,follow the regimen\n");
    const std::string out = dir.file("tasks");

    const CliResult first = run_cli("split-tasks " + dir.file("src.csv") + " --out-dir " + out);
    CHECK(first.exit_code == 0);
    CHECK(first.output.find("dc.csv: 4 documents") != std::string::npos);
    CHECK(first.output.find("dcr.csv: 6 documents") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "dc.csv"));
    CHECK(fs::exists(fs::path(out) / "run_manifest.json"));

    // rerun without --force: exit 1, nothing touched
    const auto mtime = fs::last_write_time(fs::path(out) / "dc.csv");
    const CliResult again = run_cli("split-tasks " + dir.file("src.csv") + " --out-dir " + out);
    CHECK(again.exit_code == 1);
    CHECK(fs::last_write_time(fs::path(out) / "dc.csv") == mtime);

    const CliResult forced =
        run_cli("split-tasks " + dir.file("src.csv") + " --out-dir " + out + " --force");
    CHECK(forced.exit_code == 0);
}

TEST_CASE("split-tasks rejects malformed sources with exit 1") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("bad.csv"), "id,doctor,chatgpt,rephrased\nr0,a b,,c d\n");
    const CliResult result =
        run_cli("split-tasks " + dir.file("bad.csv") + " --out-dir " + dir.file("t"));
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("chatgpt") != std::string::npos);
}

TEST_CASE("split is deterministic for a fixed seed and records entropy seeds") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 31);

    const CliResult a =
        run_cli("split --corpus " + files.dc_csv + " --seed 42 --out-dir " + dir.file("s1"));
    REQUIRE(a.exit_code == 0);
    const CliResult b =
        run_cli("split --corpus " + files.dc_csv + " --seed 42 --out-dir " + dir.file("s2"));
    REQUIRE(b.exit_code == 0);
    CHECK(testutil::read_file(dir.file("s1/support.csv")) ==
          testutil::read_file(dir.file("s2/support.csv")));
    CHECK(testutil::read_file(dir.file("s1/query.csv")) ==
          testutil::read_file(dir.file("s2/query.csv")));

    const CliResult c = run_cli("split --corpus " + files.dc_csv + " --out-dir " + dir.file("s3"));
    REQUIRE(c.exit_code == 0);
    const auto manifest = nlohmann::json::parse(testutil::read_file(dir.file("s3/run_manifest.json")));
    CHECK(manifest["seed_source"] == "entropy");
    CHECK(manifest["seed"].is_number());
}

TEST_CASE("featurize writes one json row per document") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 6, 32);
    const CliResult result =
        run_cli("featurize --corpus " + files.dc_csv + " --featurizer tfidf_char --n-min 2 " +
                "--n-max 3 --out " + dir.file("feats.jsonl"));
    REQUIRE_MESSAGE(result.exit_code == 0, result.output);
    const std::string body = testutil::read_file(dir.file("feats.jsonl"));
    CHECK(std::count(body.begin(), body.end(), '\n') == 12);
    CHECK(fs::exists(dir.file("feats.jsonl.manifest.json")));
}

TEST_CASE("train then eval round trips through model json") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 33);

    const CliResult split =
        run_cli("split --corpus " + files.dc_csv + " --seed 7 --out-dir " + dir.file("sp"));
    REQUIRE(split.exit_code == 0);

    const CliResult train = run_cli(
        "train --corpus " + files.dc_csv + " --seed 7 --featurizer tfidf_char --model nbc --out " +
        dir.file("model.json"));
    REQUIRE_MESSAGE(train.exit_code == 0, train.output);
    CHECK(fs::exists(dir.file("model.json")));
    CHECK(fs::exists(dir.file("model.json.manifest.json")));

    const CliResult eval = run_cli("eval --model " + dir.file("model.json") + " --corpus " +
                                   dir.file("sp/query.csv") + " --out " + dir.file("report.json"));
    REQUIRE_MESSAGE(eval.exit_code == 0, eval.output);
    CHECK(eval.output.find("accuracy") != std::string::npos);
    const auto report = nlohmann::json::parse(testutil::read_file(dir.file("report.json")));
    CHECK(report["accuracy"].get<double>() > 0.9);  // disjoint templates separate easily
    CHECK(report["n_samples"].get<int>() == 18);

    // dense featurizer path through the envelope
    const CliResult train2 = run_cli(
        "train --corpus " + files.dc_csv + " --seed 7 --featurizer word_average --vectors " +
        files.w2v_txt + " --vector-format word2vec_text --model lrc --out " + dir.file("m2.json"));
    REQUIRE_MESSAGE(train2.exit_code == 0, train2.output);
    const CliResult eval2 = run_cli("eval --model " + dir.file("m2.json") + " --corpus " +
                                    dir.file("sp/query.csv"));
    CHECK(eval2.exit_code == 0);
}

TEST_CASE("train validates flag combinations") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 6, 34);
    const CliResult neither = run_cli("train --featurizer tfidf_word --model nbc --out " +
                                      dir.file("m.json"));
    CHECK(neither.exit_code == 1);
    const CliResult both = run_cli("train --corpus " + files.dc_csv + " --support " +
                                   files.dc_csv + " --model nbc --out " + dir.file("m.json"));
    CHECK(both.exit_code == 1);
    const CliResult no_vecs = run_cli("train --corpus " + files.dc_csv +
                                      " --featurizer word_average --model nbc --out " +
                                      dir.file("m.json"));
    CHECK(no_vecs.exit_code == 1);
    CHECK(no_vecs.output.find("--vectors") != std::string::npos);
}

TEST_CASE("grid runs a toy config end to end") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 35);
    const std::string out = dir.file("out");
    const std::string config = toy_config_file(dir, files, 2, out);

    const CliResult result = run_cli("grid " + config);
    REQUIRE_MESSAGE(result.exit_code == 0, result.output);
    CHECK(result.output.find("12 cells, 12 ok, 0 failed") != std::string::npos);
    for (const char* dataset : {"DC", "DR", "DCR"}) {
        for (const char* artifact :
             {"table.csv", "table.md", "accuracy_bars.svg", "accuracy_heatmap.svg"})
            CHECK(fs::exists(fs::path(out) / dataset / artifact));
    }
    CHECK(fs::exists(fs::path(out) / "grid.json"));
    CHECK(fs::exists(fs::path(out) / "run_manifest.json"));

    const auto manifest = nlohmann::json::parse(testutil::read_file(out + "/run_manifest.json"));
    CHECK(manifest["base_seed"] == 13);
    CHECK(manifest["cells"] == 12);
}

TEST_CASE("grid fails fast with exit 1 when a resource is missing") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 36);
    const std::string config = toy_config_file(dir, files, 1, dir.file("out"), "missing-vectors");
    const CliResult result = run_cli("grid " + config);
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("missing.bin") != std::string::npos);
    CHECK(!fs::exists(dir.file("out/grid.json")));  // nothing ran
}

TEST_CASE("grid reports partial failure with exit 2 and completes other cells") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 37);
    const std::string out = dir.file("out");
    const std::string config = toy_config_file(dir, files, 1, out, "bad-hyperparam");
    const CliResult result = run_cli("grid " + config);
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("failed") != std::string::npos);
    // the healthy cells still produced complete artifacts
    CHECK(fs::exists(fs::path(out) / "DC" / "table.csv"));
    CHECK(testutil::read_file(out + "/DC/table.csv").find("failed") != std::string::npos);
}

TEST_CASE("grid --single-seed collapses to one repeat") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 40);
    const std::string out = dir.file("out");
    const std::string config = toy_config_file(dir, files, 5, out);
    const CliResult result = run_cli("grid " + config + " --single-seed");
    REQUIRE_MESSAGE(result.exit_code == 0, result.output);
    const auto grid = nlohmann::json::parse(testutil::read_file(out + "/grid.json"));
    CHECK(grid["config"]["repeats"] == 1);
    for (const auto& cell : grid["cells"]) CHECK(cell["repeats"].size() == 1);
}

TEST_CASE("train accepts an explicit support file with a separate fit corpus") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 10, 41);
    REQUIRE(run_cli("split --corpus " + files.dc_csv + " --seed 3 --out-dir " + dir.file("sp"))
                .exit_code == 0);

    const CliResult train = run_cli("train --support " + dir.file("sp/support.csv") +
                                    " --fit-corpus " + files.dc_csv +
                                    " --featurizer tfidf_word --model dtc --seed 3 --out " +
                                    dir.file("m.json"));
    REQUIRE_MESSAGE(train.exit_code == 0, train.output);
    const CliResult eval =
        run_cli("eval --model " + dir.file("m.json") + " --corpus " + dir.file("sp/query.csv") +
                " --averaging macro");
    REQUIRE_MESSAGE(eval.exit_code == 0, eval.output);
    CHECK(eval.output.find("macro averaging") != std::string::npos);
}

TEST_CASE("report re-emits artifacts from a grid snapshot") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 8, 38);
    const std::string out = dir.file("out");
    const std::string config = toy_config_file(dir, files, 1, out);
    REQUIRE(run_cli("grid " + config).exit_code == 0);

    const CliResult result = run_cli("report --grid " + out + "/grid.json --out-dir " +
                                     dir.file("rep") + " --dataset DC");
    REQUIRE_MESSAGE(result.exit_code == 0, result.output);
    CHECK(fs::exists(dir.file("rep/DC/table.csv")));
    CHECK(testutil::read_file(dir.file("rep/DC/table.csv")) ==
          testutil::read_file(out + "/DC/table.csv"));
    CHECK(testutil::read_file(dir.file("rep/DC/accuracy_heatmap.svg")) ==
          testutil::read_file(out + "/DC/accuracy_heatmap.svg"));
}

TEST_CASE("inspect-embeddings summarizes files and composes OOV words") {
    testutil::TempDir dir;
    const auto files = testutil::write_toy_grid_files(dir, 6, 39);

    const CliResult glove = run_cli("inspect-embeddings " + files.glove_txt +
                                    " --format glove --limit 3 --word rest --word zzzz");
    REQUIRE_MESSAGE(glove.exit_code == 0, glove.output);
    CHECK(glove.output.find("dim: 10") != std::string::npos);
    CHECK(glove.output.find("entries: 36") != std::string::npos);
    CHECK(glove.output.find("rest: in vocabulary") != std::string::npos);
    CHECK(glove.output.find("zzzz: out of vocabulary") != std::string::npos);

    const CliResult missing = run_cli("inspect-embeddings " + dir.file("nope.txt") +
                                      " --format glove");
    CHECK(missing.exit_code == 1);
}

TEST_CASE("--help output covers the documented surface") {
    const CliResult top = run_cli("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"split-tasks", "split", "featurize", "train", "eval", "grid", "report",
                            "inspect-embeddings"})
        CHECK_MESSAGE(top.output.find(sub) != std::string::npos, sub);

    const CliResult train_help = run_cli("train --help");
    for (const char* flag :
         {"--corpus", "--support", "--fit-corpus", "--fit-scope", "--seed", "--featurizer",
          "--n-min", "--n-max", "--vectors", "--vector-format", "--restrict-vocabulary",
          "--subword", "--subword-n-min", "--subword-n-max", "--subword-buckets",
          "--subword-seed", "--subword-sidecar", "--model", "--hyperparams", "--out"})
        CHECK_MESSAGE(train_help.output.find(flag) != std::string::npos, flag);

    const CliResult grid_help = run_cli("grid --help");
    for (const char* flag : {"--jobs", "--single-seed"})
        CHECK_MESSAGE(grid_help.output.find(flag) != std::string::npos, flag);
}
