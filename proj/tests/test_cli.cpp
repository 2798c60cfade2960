#include <doctest.h>

#include <cdl/dataset.hpp>
#include <cdl/evaluate.hpp>
#include <cdl/metrics.hpp>
#include <cdl/model_io.hpp>
#include <cdl/report.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("cdl_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args, const fs::path& capture_dir) {
    const fs::path log = capture_dir / "run.log";
    const std::string command =
        std::string(CDL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const fs::path& file) { return json::parse(slurp(file)); }

// Shared fixture: synth a dataset once, reuse across cases.
const fs::path& dataset_dir() {
    static TempDir dir;
    static bool made = false;
    if (!made) {
        const auto r = run("synth --out " + dir.path.string() +
                               " --seen 5 --unseen 3 --samples 10 --noise 0 --seed 3"
                               " --validation-classes 2",
                           dir.path);
        REQUIRE(r.exit_code == 0);
        made = true;
    }
    return dir.path;
}

std::string dataset_manifest() { return (dataset_dir() / "dataset.cdl").string(); }

}  // namespace

TEST_CASE("cli: synth then validate-data") {
    TempDir tmp;
    const auto r = run("validate-data --data " + dataset_manifest(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("dataset ok") != std::string::npos);
    CHECK(r.output.find("seen classes 5") != std::string::npos);
}

TEST_CASE("cli: bad manifest is a data error naming the file") {
    TempDir tmp;
    const auto missing = (tmp.path / "nope.cdl").string();
    const auto r = run("validate-data --data " + missing, tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("nope.cdl") != std::string::npos);
}

TEST_CASE("cli: config errors use their own exit code") {
    TempDir tmp;
    const auto train = run("train --data " + dataset_manifest() + " --out " +
                               tmp.path.string() + " --variant bogus",
                           tmp.path);
    CHECK(train.exit_code == 1);

    const auto eval = run("eval --data " + dataset_manifest() + " --model x --out " +
                              tmp.path.string() + " --mode sideways",
                          tmp.path);
    CHECK(eval.exit_code == 1);

    const auto noout = run("train --data " + dataset_manifest(), tmp.path);
    CHECK(noout.exit_code == 1);
    CHECK(noout.output.find("CDL_OUTPUT_DIR") != std::string::npos);
}

TEST_CASE("cli: train writes a loadable model and an iteration-per-row trace") {
    TempDir tmp;
    const auto r = run("train --data " + dataset_manifest() + " --out " + tmp.path.string() +
                           " --seed 5",
                       tmp.path);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "model.cdl"));
    CHECK(fs::exists(tmp.path / "trace.csv"));

    const cdl::CdlModel model = cdl::load_model(tmp.path);
    CHECK(model.trace.iterations_run() >= 1);

    // Monotone totals across the recorded steps.
    double previous = model.trace.initial.total;
    for (const auto& it : model.trace.iterations) {
        for (double v : it.step_total) {
            CHECK(v <= previous + 1e-8 * previous + 1e-12);
            previous = v;
        }
    }
}

TEST_CASE("cli: --max-iters 1 leaves exactly one trace row") {
    TempDir tmp;
    const auto r = run("train --data " + dataset_manifest() + " --out " + tmp.path.string() +
                           " --max-iters 1",
                       tmp.path);
    REQUIRE(r.exit_code == 0);
    const std::string trace = slurp(tmp.path / "trace.csv");
    // Header plus one data row.
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);
}

TEST_CASE("cli: every variant trains, in either matrix format") {
    for (const char* variant : {"CDL", "NA", "CDL-Ad", "CDL-Pr", "CDL-Ad-Pr"}) {
        TempDir tmp;
        const auto r = run("train --data " + dataset_manifest() + " --out " +
                               tmp.path.string() + " --max-iters 3 --variant " + variant,
                           tmp.path);
        CHECK(r.exit_code == 0);
        CHECK(cdl::load_model(tmp.path).variant == cdl::variant_from_name(variant));
    }

    TempDir tmp;
    const auto r = run("train --data " + dataset_manifest() + " --out " + tmp.path.string() +
                           " --max-iters 3 --format binary",
                       tmp.path);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "visual_dict.bin"));
    CHECK(cdl::load_model(tmp.path).fitted());
}

TEST_CASE("cli: eval without the needed test split is a config error") {
    // A dataset with no test splits at all.
    TempDir data_dir;
    cdl::Dataset data;
    data.train_features = cdl::Matrix::Identity(3, 2);  // d = 3, one sample per class
    data.train_labels = {0, 1};
    data.seen_semantics = cdl::Matrix::Identity(2, 2);  // m = 2, K = 2
    data.unseen_semantics = cdl::Matrix::Ones(2, 1);    // L = 1
    data.seen_class_names = {"a", "b"};
    data.unseen_class_names = {"c"};
    cdl::save_dataset(data, data_dir.path / "d.cdl");

    TempDir model_dir;
    REQUIRE(run("train --data " + (data_dir.path / "d.cdl").string() + " --out " +
                    model_dir.path.string() + " --max-iters 2",
                model_dir.path)
                .exit_code == 0);
    TempDir eval_dir;
    const auto r = run("eval --data " + (data_dir.path / "d.cdl").string() + " --model " +
                           model_dir.path.string() + " --out " + eval_dir.path.string(),
                       eval_dir.path);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("test_unseen_features") != std::string::npos);
}

TEST_CASE("cli: config file values override flags") {
    TempDir tmp;
    std::ofstream(tmp.path / "cfg.json") << R"({"max-iters": 1})";
    const auto r = run("train --data " + dataset_manifest() + " --out " + tmp.path.string() +
                           " --max-iters 50 --config " + (tmp.path / "cfg.json").string(),
                       tmp.path);
    REQUIRE(r.exit_code == 0);
    const cdl::CdlModel model = cdl::load_model(tmp.path);
    CHECK(model.trace.iterations_run() == 1);
}

TEST_CASE("cli: CDL_OUTPUT_DIR supplies the missing --out") {
    TempDir tmp;
    const auto out = tmp.path / "from_env";
    const std::string command = "CDL_OUTPUT_DIR=" + out.string() + " " + CDL_CLI_PATH +
                                " synth --seen 3 --unseen 1 --samples 4 > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(out / "dataset.cdl"));
}

TEST_CASE("cli: zsl evaluation reports high planted accuracy and honest fusion") {
    TempDir model_dir;
    REQUIRE(run("train --data " + dataset_manifest() + " --out " + model_dir.path.string(),
                model_dir.path)
                .exit_code == 0);

    TempDir eval_dir;
    const auto r = run("eval --data " + dataset_manifest() + " --model " +
                           model_dir.path.string() + " --out " + eval_dir.path.string() +
                           " --mode zsl --spaces all",
                       eval_dir.path);
    REQUIRE(r.exit_code == 0);

    const json report = load_json(eval_dir.path / "report.json");
    CHECK(report.at("mode") == "zsl");
    CHECK(report.at("results").size() == 7);

    double visual_accuracy = -1.0;
    double fused_accuracy = -1.0;
    for (const auto& row : report.at("results")) {
        if (row.at("spaces") == "v") visual_accuracy = row.at("accuracy").get<double>();
        if (row.at("spaces") == "va") fused_accuracy = row.at("accuracy").get<double>();
    }
    CHECK(visual_accuracy >= 0.95);

    // The reported fused accuracy equals an in-process fuse of the two spaces.
    const cdl::CdlModel model = cdl::load_model(model_dir.path);
    const cdl::Dataset data = cdl::load_dataset(dataset_manifest());
    const auto fused_preds = cdl::argmax_classes(cdl::fuse(
        {cdl::similarities(model, data.test_unseen_features, cdl::Space::Visual,
                           cdl::Candidates::Unseen),
         cdl::similarities(model, data.test_unseen_features, cdl::Space::Aligned,
                           cdl::Candidates::Unseen)}));
    std::vector<int> registry;
    for (cdl::Index l = 0; l < data.unseen_classes(); ++l) {
        registry.push_back(static_cast<int>(l));
    }
    const auto fused_check =
        cdl::per_class_top1(fused_preds, data.test_unseen_labels, registry);
    CHECK(fused_accuracy == doctest::Approx(fused_check.overall).epsilon(1e-12));
}

TEST_CASE("cli: gzsl report rows satisfy the harmonic-mean identity") {
    TempDir model_dir;
    REQUIRE(run("train --data " + dataset_manifest() + " --out " + model_dir.path.string(),
                model_dir.path)
                .exit_code == 0);

    TempDir eval_dir;
    const auto r = run("eval --data " + dataset_manifest() + " --model " +
                           model_dir.path.string() + " --out " + eval_dir.path.string() +
                           " --mode gzsl --spaces v,a,va --export-matrices",
                       eval_dir.path);
    REQUIRE(r.exit_code == 0);

    const json report = load_json(eval_dir.path / "report.json");
    CHECK(report.at("mode") == "gzsl");
    REQUIRE(report.at("results").size() == 3);
    for (const auto& row : report.at("results")) {
        const double ts = row.at("ts").get<double>();
        const double tr = row.at("tr").get<double>();
        const double h = row.at("H").get<double>();
        CHECK(h == doctest::Approx(cdl::harmonic_mean(ts, tr)).epsilon(1e-12));
    }
    CHECK(fs::exists(eval_dir.path / "matrices" / "unseen_prototypes.txt"));
    CHECK(fs::exists(eval_dir.path / "matrices" / "similarity_visual_unseen.txt"));
    CHECK(fs::exists(eval_dir.path / "matrices" / "similarity_aligned_seen.txt"));
}

TEST_CASE("cli: evaluating NA models reports zero optimization iterations") {
    TempDir model_dir;
    REQUIRE(run("train --data " + dataset_manifest() + " --out " + model_dir.path.string() +
                    " --variant NA",
                model_dir.path)
                .exit_code == 0);
    TempDir eval_dir;
    const auto r = run("eval --data " + dataset_manifest() + " --model " +
                           model_dir.path.string() + " --out " + eval_dir.path.string() +
                           " --spaces v",
                       eval_dir.path);
    REQUIRE(r.exit_code == 0);
    const json report = load_json(eval_dir.path / "report.json");
    CHECK(report.at("iterations_run") == 0);
}

TEST_CASE("cli: identical seeds give byte-identical models and reports") {
    TempDir a, b;
    const std::string args = "train --data " + dataset_manifest() + " --seed 11 --out ";
    REQUIRE(run(args + a.path.string(), a.path).exit_code == 0);
    REQUIRE(run(args + b.path.string(), b.path).exit_code == 0);
    for (const char* file :
         {"model.cdl", "trace.csv", "seen_prototypes.txt", "unseen_prototypes.txt",
          "visual_dict.txt", "semantic_dict.txt", "seen_codes.txt", "unseen_codes.txt"}) {
        CHECK(slurp(a.path / file) == slurp(b.path / file));
    }

    TempDir ea, eb;
    const std::string eval_args =
        "eval --data " + dataset_manifest() + " --model " + a.path.string() + " --out ";
    REQUIRE(run(eval_args + ea.path.string(), ea.path).exit_code == 0);
    REQUIRE(run(eval_args + eb.path.string(), eb.path).exit_code == 0);
    CHECK(slurp(ea.path / "report.json") == slurp(eb.path / "report.json"));
    CHECK(slurp(ea.path / "trace.csv") == slurp(eb.path / "trace.csv"));
}

TEST_CASE("cli: gridsearch of size one equals a manual train + eval") {
    TempDir grid_dir;
    const auto r = run("gridsearch --data " + dataset_manifest() + " --out " +
                           grid_dir.path.string() +
                           " --grid-lambda 1 --grid-alpha 1 --grid-beta 1 --grid-gamma 0.01"
                           " --rank-space v --seed 2",
                       grid_dir.path);
    REQUIRE(r.exit_code == 0);

    const json grid = load_json(grid_dir.path / "grid.json");
    REQUIRE(grid.at("rows").size() == 1);
    const double reported = grid.at("rows")[0].at("validation_accuracy").get<double>();

    // Re-run the protocol in process.
    const cdl::Dataset data = cdl::load_dataset(dataset_manifest());
    const cdl::Dataset split = cdl::make_validation_split(data);
    cdl::Hyperparams hp;
    hp.lambda = 1;
    hp.alpha = 1;
    hp.beta = 1;
    hp.gamma = 0.01;
    const cdl::CdlModel model = cdl::fit(split, hp, cdl::Variant::Full, 2);
    const auto report = cdl::evaluate_zsl(model, split.test_unseen_features,
                                          split.test_unseen_labels,
                                          {cdl::SpaceSet::parse("v")},
                                          split.unseen_class_names);
    CHECK(reported == doctest::Approx(report.entries.front().accuracy.overall).epsilon(1e-12));
    CHECK(fs::exists(grid_dir.path / "best_model" / "model.cdl"));
}

TEST_CASE("cli: full five-value grid enumerates 625 ranked rows, deterministically") {
    TempDir data_dir;
    REQUIRE(run("synth --out " + data_dir.path.string() +
                    " --feature-dim 6 --semantic-dim 5 --seen 4 --unseen 1 --samples 3"
                    " --code-jitter 0.4 --validation-classes 2 --seed 9",
                data_dir.path)
                .exit_code == 0);
    TempDir grid_dir;
    const auto r = run("gridsearch --data " + (data_dir.path / "dataset.cdl").string() +
                           " --out " + grid_dir.path.string() + " --max-iters 2",
                       grid_dir.path);
    REQUIRE(r.exit_code == 0);

    const std::string csv = slurp(grid_dir.path / "grid.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 626);  // header + 625 rows

    // Ranked by validation accuracy, non-increasing; the winner is the max.
    const json grid = load_json(grid_dir.path / "grid.json");
    double previous = 2.0;
    double best = -1.0;
    for (const auto& row : grid.at("rows")) {
        const double acc = row.at("validation_accuracy").get<double>();
        CHECK(acc <= previous);
        best = std::max(best, acc);
        previous = acc;
    }
    CHECK(grid.at("rows")[0].at("validation_accuracy").get<double>() == best);

    // Identical rerun produces a byte-identical table.
    TempDir rerun_dir;
    REQUIRE(run("gridsearch --data " + (data_dir.path / "dataset.cdl").string() +
                    " --out " + rerun_dir.path.string() + " --max-iters 2",
                rerun_dir.path)
                .exit_code == 0);
    CHECK(slurp(rerun_dir.path / "grid.csv") == csv);
}
