// Command-line driver: train, eval, gridsearch, synth, validate-data.
//
// Exit codes: 0 success, 1 configuration errors, 2 data errors, 3 internal
// invariant failures.

#include <CLI11.hpp>
#include <json.hpp>

#include <cdl/evaluate.hpp>
#include <cdl/matrix_io.hpp>
#include <cdl/model.hpp>
#include <cdl/model_io.hpp>
#include <cdl/planted.hpp>
#include <cdl/report.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ConfigError : cdl::Error {
    using Error::Error;
};

// Values from --config take precedence over command-line flags.
class ConfigOverrides {
public:
    void bind(const std::string& key, double* target) {
        setters_[key] = [target](const json& v) { *target = v.get<double>(); };
    }
    void bind(const std::string& key, int* target) {
        setters_[key] = [target](const json& v) { *target = v.get<int>(); };
    }
    void bind(const std::string& key, std::uint64_t* target) {
        setters_[key] = [target](const json& v) { *target = v.get<std::uint64_t>(); };
    }
    void bind(const std::string& key, bool* target) {
        setters_[key] = [target](const json& v) { *target = v.get<bool>(); };
    }
    void bind(const std::string& key, std::string* target) {
        setters_[key] = [target](const json& v) { *target = v.get<std::string>(); };
    }

    void apply(const std::string& config_path) const {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file: " + config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config file " + config_path + ": " + e.what());
        }
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [key, value] : j.items()) {
            auto it = setters_.find(key);
            if (it == setters_.end()) {
                throw ConfigError("config file key '" + key + "' is not a known option");
            }
            try {
                it->second(value);
            } catch (const json::exception& e) {
                throw ConfigError("config file key '" + key + "': " + e.what());
            }
        }
    }

private:
    std::map<std::string, std::function<void(const json&)>> setters_;
};

struct TrainFlags {
    double lambda = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.01;
    std::int64_t bases = 0;  // 0 = one atom per seen class
    int max_iters = 100;
    double rel_tol = 1e-7;
    double ridge_eps = cdl::kDefaultRidgeEps;
    std::string variant = "CDL";
    std::uint64_t seed = 0;
    bool normalize = false;
    std::string format = "text";
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags, ConfigOverrides& overrides) {
    cmd->add_option("--lambda", flags.lambda, "Semantic reconstruction weight");
    cmd->add_option("--alpha", flags.alpha, "Unseen-class adaptation weight");
    cmd->add_option("--beta", flags.beta, "Sample-fit weight");
    cmd->add_option("--gamma", flags.gamma, "Ridge used when encoding test samples");
    cmd->add_option("--bases", flags.bases, "Dictionary atoms (0 = one per seen class)");
    cmd->add_option("--max-iters", flags.max_iters, "Maximum optimization cycles");
    cmd->add_option("--rel-tol", flags.rel_tol, "Relative loss-decrease stopping tolerance");
    cmd->add_option("--ridge-eps", flags.ridge_eps, "Ridge added to guard singular systems");
    cmd->add_option("--variant", flags.variant,
                    "Model variant: CDL, NA, CDL-Ad, CDL-Pr, CDL-Ad-Pr");
    cmd->add_option("--seed", flags.seed, "Random seed");
    cmd->add_flag("--normalize-features", flags.normalize,
                  "L2-normalize feature columns before use");
    cmd->add_option("--format", flags.format, "Matrix file format: text or binary");
    overrides.bind("lambda", &flags.lambda);
    overrides.bind("alpha", &flags.alpha);
    overrides.bind("beta", &flags.beta);
    overrides.bind("gamma", &flags.gamma);
    overrides.bind("max-iters", &flags.max_iters);
    overrides.bind("rel-tol", &flags.rel_tol);
    overrides.bind("ridge-eps", &flags.ridge_eps);
    overrides.bind("variant", &flags.variant);
    overrides.bind("seed", &flags.seed);
    overrides.bind("normalize-features", &flags.normalize);
    overrides.bind("format", &flags.format);
}

cdl::Hyperparams hyperparams_from(const TrainFlags& flags) {
    cdl::Hyperparams hp;
    hp.lambda = flags.lambda;
    hp.alpha = flags.alpha;
    hp.beta = flags.beta;
    hp.gamma = flags.gamma;
    if (flags.bases > 0) hp.bases = static_cast<cdl::Index>(flags.bases);
    hp.max_iters = flags.max_iters;
    hp.rel_tol = flags.rel_tol;
    hp.ridge_eps = flags.ridge_eps;
    try {
        hp.validate();
    } catch (const cdl::Error& e) {
        throw ConfigError(e.what());
    }
    return hp;
}

cdl::MatrixFormat format_from(const std::string& name) {
    if (name == "text") return cdl::MatrixFormat::Text;
    if (name == "binary") return cdl::MatrixFormat::Binary;
    throw ConfigError("unknown matrix format '" + name + "' (expected text or binary)");
}

cdl::Variant variant_from(const std::string& name) {
    try {
        return cdl::variant_from_name(name);
    } catch (const cdl::Error& e) {
        throw ConfigError(e.what());
    }
}

std::vector<cdl::SpaceSet> space_combos_from(const std::string& spec) {
    if (spec == "all") return cdl::SpaceSet::all_subsets();
    std::vector<cdl::SpaceSet> combos;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        try {
            combos.push_back(cdl::SpaceSet::parse(token));
        } catch (const cdl::Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (combos.empty()) throw ConfigError("no evaluation spaces given");
    return combos;
}

std::vector<double> grid_from(const std::string& spec, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            values.push_back(std::stod(token));
        } catch (const std::logic_error&) {
            throw ConfigError(what + ": cannot parse '" + token + "' as a number");
        }
    }
    if (values.empty()) throw ConfigError(what + ": empty grid");
    return values;
}

fs::path require_out_dir(const std::string& out) {
    if (out.empty()) {
        throw ConfigError("no output directory: pass --out or set CDL_OUTPUT_DIR");
    }
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void maybe_normalize(cdl::Dataset& data, bool normalize) {
    if (!normalize) return;
    cdl::normalize_feature_columns(data.train_features);
    if (data.has_unseen_test()) cdl::normalize_feature_columns(data.test_unseen_features);
    if (data.has_seen_test()) cdl::normalize_feature_columns(data.test_seen_features);
}

std::string pct(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * value);
    return buf;
}

// Short rendering for stdout summaries; files keep the full 17 digits.
std::string brief(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const std::string& out, const cdl::PlantedParams& params,
              std::int64_t validation_classes, const std::string& format, bool export_truth) {
    const fs::path dir = require_out_dir(out);
    const cdl::MatrixFormat fmt = format_from(format);
    cdl::PlantedInstance inst = cdl::generate_planted(params);
    if (validation_classes < 0 || validation_classes >= params.seen_classes) {
        throw ConfigError("--validation-classes must lie in [0, seen classes)");
    }
    for (std::int64_t k = 0; k < validation_classes; ++k) {
        inst.dataset.validation_class_names.push_back(
            inst.dataset.seen_class_names[static_cast<std::size_t>(k)]);
    }
    const fs::path manifest = dir / "dataset.cdl";
    cdl::save_dataset(inst.dataset, manifest, fmt);
    if (export_truth) {
        const std::string ext = cdl::matrix_extension(fmt);
        const fs::path truth = dir / "truth";
        fs::create_directories(truth);
        cdl::write_matrix(inst.visual_dict, truth / ("visual_dict." + ext));
        cdl::write_matrix(inst.semantic_dict, truth / ("semantic_dict." + ext));
        cdl::write_matrix(inst.seen_codes, truth / ("seen_codes." + ext));
        cdl::write_matrix(inst.unseen_codes, truth / ("unseen_codes." + ext));
        cdl::write_matrix(inst.seen_prototypes, truth / ("seen_prototypes." + ext));
        cdl::write_matrix(inst.unseen_prototypes, truth / ("unseen_prototypes." + ext));
    }
    std::cout << "wrote " << manifest.string() << "\n";
    return kExitOk;
}

int cmd_validate_data(const std::string& manifest) {
    const cdl::Dataset data = cdl::load_dataset(manifest);
    std::cout << "dataset ok: " << manifest << "\n"
              << "  feature dim " << data.feature_dim() << ", semantic dim "
              << data.semantic_dim() << "\n"
              << "  seen classes " << data.seen_classes() << " (" << data.train_samples()
              << " training samples), unseen classes " << data.unseen_classes() << "\n"
              << "  test samples: unseen " << data.test_unseen_features.cols() << ", seen "
              << data.test_seen_features.cols() << "\n"
              << "  validation classes: " << data.validation_class_names.size() << "\n";
    return kExitOk;
}

int cmd_train(const std::string& data_path, const std::string& out, const TrainFlags& flags) {
    const fs::path dir = require_out_dir(out);
    const cdl::MatrixFormat fmt = format_from(flags.format);
    const cdl::Hyperparams hp = hyperparams_from(flags);
    const cdl::Variant variant = variant_from(flags.variant);

    cdl::Dataset data = cdl::load_dataset(data_path);
    maybe_normalize(data, flags.normalize);

    cdl::CdlModel model = cdl::fit(data, hp, variant, flags.seed);
    model.normalized_features = flags.normalize;
    cdl::save_model(model, dir, fmt);

    const double final_loss = model.trace.iterations.empty()
                                  ? model.trace.initial.total
                                  : model.trace.iterations.back().end.total;
    std::cout << "variant " << cdl::variant_name(variant) << ": "
              << model.trace.iterations_run() << " iterations, "
              << (model.trace.converged ? "converged" : "iteration limit reached") << "\n"
              << "loss: initial " << brief(model.trace.initial.total) << ", final "
              << brief(final_loss) << "\n"
              << "wrote model to " << dir.string() << "\n";
    return kExitOk;
}

void export_matrices(const cdl::CdlModel& model, const cdl::Dataset& data,
                     const std::string& mode, const fs::path& dir, cdl::MatrixFormat fmt) {
    fs::create_directories(dir);
    const std::string ext = cdl::matrix_extension(fmt);
    cdl::write_matrix(model.seen_prototypes, dir / ("seen_prototypes." + ext));
    cdl::write_matrix(model.unseen_prototypes, dir / ("unseen_prototypes." + ext));
    cdl::write_matrix(model.visual_dict, dir / ("visual_dict." + ext));
    cdl::write_matrix(model.semantic_dict, dir / ("semantic_dict." + ext));
    cdl::write_matrix(model.seen_codes, dir / ("seen_codes." + ext));
    cdl::write_matrix(model.unseen_codes, dir / ("unseen_codes." + ext));
    cdl::write_matrix(model.seen_semantics, dir / ("seen_semantics." + ext));
    cdl::write_matrix(model.unseen_semantics, dir / ("unseen_semantics." + ext));

    const cdl::Candidates candidates =
        mode == "gzsl" ? cdl::Candidates::Both : cdl::Candidates::Unseen;
    const std::map<cdl::Space, std::string> spaces = {{cdl::Space::Visual, "visual"},
                                                      {cdl::Space::Aligned, "aligned"},
                                                      {cdl::Space::Semantic, "semantic"}};
    for (const auto& [space, name] : spaces) {
        const auto sims = cdl::similarities(model, data.test_unseen_features, space, candidates);
        cdl::write_matrix(sims.scores, dir / ("similarity_" + name + "_unseen." + ext));
        if (mode == "gzsl") {
            const auto seen_sims =
                cdl::similarities(model, data.test_seen_features, space, candidates);
            cdl::write_matrix(seen_sims.scores, dir / ("similarity_" + name + "_seen." + ext));
        }
    }
}

int cmd_eval(const std::string& data_path, const std::string& model_path,
             const std::string& out, const std::string& mode, const std::string& spaces,
             bool dump_matrices, const std::string& format) {
    if (mode != "zsl" && mode != "gzsl") {
        throw ConfigError("unknown mode '" + mode + "' (expected zsl or gzsl)");
    }
    const fs::path dir = require_out_dir(out);
    const std::vector<cdl::SpaceSet> combos = space_combos_from(spaces);
    const cdl::MatrixFormat fmt = format_from(format);

    const cdl::CdlModel model = cdl::load_model(model_path);
    cdl::Dataset data = cdl::load_dataset(data_path);
    maybe_normalize(data, model.normalized_features);

    if (!data.has_unseen_test()) {
        throw ConfigError("evaluation requires test_unseen_features in the dataset manifest");
    }
    if (mode == "gzsl" && !data.has_seen_test()) {
        throw ConfigError("mode gzsl requires test_seen_features in the dataset manifest");
    }

    cdl::EvalReport report;
    if (mode == "zsl") {
        report = cdl::evaluate_zsl(model, data.test_unseen_features, data.test_unseen_labels,
                                   combos, data.unseen_class_names);
        for (const auto& entry : report.entries) {
            std::cout << "zsl " << entry.spaces << ": " << pct(entry.accuracy.overall) << "\n";
        }
    } else {
        report = cdl::evaluate_gzsl(model, data.test_unseen_features, data.test_unseen_labels,
                                    data.test_seen_features, data.test_seen_labels, combos,
                                    data.seen_class_names, data.unseen_class_names);
        for (const auto& entry : report.entries) {
            std::cout << "gzsl " << entry.spaces << ": ts " << pct(entry.unseen.overall)
                      << ", tr " << pct(entry.seen.overall) << ", H " << pct(entry.hmean)
                      << "\n";
        }
    }

    cdl::export_report(report, model.trace, dir);
    if (dump_matrices) export_matrices(model, data, mode, dir / "matrices", fmt);
    std::cout << "wrote report to " << (dir / "report.json").string() << "\n";
    return kExitOk;
}

struct GridPoint {
    double lambda, alpha, beta, gamma;
    double accuracy = 0.0;
};

int cmd_gridsearch(const std::string& data_path, const std::string& out,
                   const TrainFlags& flags, const std::string& grid_lambda,
                   const std::string& grid_alpha, const std::string& grid_beta,
                   const std::string& grid_gamma, const std::string& rank_space) {
    const fs::path dir = require_out_dir(out);
    const cdl::MatrixFormat fmt = format_from(flags.format);
    const cdl::Variant variant = variant_from(flags.variant);
    cdl::SpaceSet combo = [&] {
        try {
            return cdl::SpaceSet::parse(rank_space);
        } catch (const cdl::Error& e) {
            throw ConfigError(e.what());
        }
    }();
    const std::vector<double> lambdas = grid_from(grid_lambda, "--grid-lambda");
    const std::vector<double> alphas = grid_from(grid_alpha, "--grid-alpha");
    const std::vector<double> betas = grid_from(grid_beta, "--grid-beta");
    const std::vector<double> gammas = grid_from(grid_gamma, "--grid-gamma");

    cdl::Dataset data = cdl::load_dataset(data_path);
    maybe_normalize(data, flags.normalize);
    const cdl::Dataset split = cdl::make_validation_split(data);

    std::vector<GridPoint> points;
    for (double lambda : lambdas) {
        for (double alpha : alphas) {
            for (double beta : betas) {
                for (double gamma : gammas) {
                    TrainFlags point_flags = flags;
                    point_flags.lambda = lambda;
                    point_flags.alpha = alpha;
                    point_flags.beta = beta;
                    point_flags.gamma = gamma;
                    const cdl::Hyperparams hp = hyperparams_from(point_flags);
                    const cdl::CdlModel model = cdl::fit(split, hp, variant, flags.seed);
                    const cdl::EvalReport report = cdl::evaluate_zsl(
                        model, split.test_unseen_features, split.test_unseen_labels, {combo},
                        split.unseen_class_names);
                    points.push_back(
                        {lambda, alpha, beta, gamma, report.entries.front().accuracy.overall});
                }
            }
        }
    }

    // Rank by validation accuracy; ties keep enumeration order.
    std::stable_sort(points.begin(), points.end(),
                     [](const GridPoint& a, const GridPoint& b) {
                         return a.accuracy > b.accuracy;
                     });

    std::ofstream csv(dir / "grid.csv");
    if (!csv) throw cdl::DataError("cannot open grid.csv for writing");
    csv << "rank,lambda,alpha,beta,gamma,validation_accuracy\n";
    json rows = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        csv << (i + 1) << "," << cdl::format_double(p.lambda) << ","
            << cdl::format_double(p.alpha) << "," << cdl::format_double(p.beta) << ","
            << cdl::format_double(p.gamma) << "," << cdl::format_double(p.accuracy) << "\n";
        rows.push_back(json{{"rank", i + 1},
                            {"lambda", p.lambda},
                            {"alpha", p.alpha},
                            {"beta", p.beta},
                            {"gamma", p.gamma},
                            {"validation_accuracy", p.accuracy}});
    }
    if (!csv) throw cdl::DataError("write failed: " + (dir / "grid.csv").string());
    {
        std::ofstream jout(dir / "grid.json");
        if (!jout) throw cdl::DataError("cannot open grid.json for writing");
        jout << json{{"rank_space", combo.name()},
                     {"variant", cdl::variant_name(variant)},
                     {"rows", std::move(rows)}}
                    .dump(2)
             << "\n";
        if (!jout) throw cdl::DataError("write failed: " + (dir / "grid.json").string());
    }

    // Retrain the winner on the full seen set.
    const GridPoint& best = points.front();
    TrainFlags best_flags = flags;
    best_flags.lambda = best.lambda;
    best_flags.alpha = best.alpha;
    best_flags.beta = best.beta;
    best_flags.gamma = best.gamma;
    cdl::CdlModel model = cdl::fit(data, hyperparams_from(best_flags), variant, flags.seed);
    model.normalized_features = flags.normalize;
    cdl::save_model(model, dir / "best_model", fmt);

    std::cout << points.size() << " grid points evaluated (rank space " << combo.name()
              << ")\n"
              << "best: lambda " << brief(best.lambda) << ", alpha " << brief(best.alpha)
              << ", beta " << brief(best.beta) << ", gamma " << brief(best.gamma)
              << ", validation accuracy " << pct(best.accuracy) << "\n"
              << "wrote " << (dir / "grid.csv").string() << " and retrained model in "
              << (dir / "best_model").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled dictionary learning for zero-shot recognition"};
    app.require_subcommand(1);
    int exit_code = kExitOk;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic planted dataset");
    std::string synth_out;
    cdl::PlantedParams params;
    std::string synth_format = "text";
    bool export_truth = false;
    std::int64_t s_d = 8, s_m = 6, s_seen = 5, s_unseen = 3, s_samples = 20, s_val = 0;
    std::uint64_t s_seed = 0;
    synth->add_option("--out", synth_out, "Output directory")->envname("CDL_OUTPUT_DIR");
    synth->add_option("--feature-dim", s_d, "Visual feature dimension");
    synth->add_option("--semantic-dim", s_m, "Semantic dimension");
    synth->add_option("--seen", s_seen, "Seen class count");
    synth->add_option("--unseen", s_unseen, "Unseen class count");
    synth->add_option("--samples", s_samples, "Samples per class and split");
    synth->add_option("--noise", params.noise, "Gaussian noise level");
    synth->add_option("--code-jitter", params.code_jitter, "Off-pattern code mass");
    synth->add_option("--seed", s_seed, "Random seed");
    synth->add_option("--validation-classes", s_val,
                      "Mark the first N seen classes as the validation hold-out");
    synth->add_option("--format", synth_format, "Matrix file format: text or binary");
    synth->add_flag("--export-truth", export_truth, "Also write the generating matrices");
    synth->callback([&]() {
        params.feature_dim = s_d;
        params.semantic_dim = s_m;
        params.seen_classes = s_seen;
        params.unseen_classes = s_unseen;
        params.samples_per_class = s_samples;
        params.seed = s_seed;
        exit_code = cmd_synth(synth_out, params, s_val, synth_format, export_truth);
    });

    // validate-data
    auto* validate = app.add_subcommand("validate-data", "Load and validate a dataset manifest");
    std::string validate_data;
    validate->add_option("--data", validate_data, "Dataset manifest")->required();
    validate->callback([&]() { exit_code = cmd_validate_data(validate_data); });

    // train
    auto* train = app.add_subcommand("train", "Fit a model and persist it");
    std::string train_data, train_out, train_config;
    TrainFlags train_flags;
    ConfigOverrides train_overrides;
    train->add_option("--data", train_data, "Dataset manifest")->required();
    train->add_option("--out", train_out, "Output directory")->envname("CDL_OUTPUT_DIR");
    train->add_option("--config", train_config, "JSON config; values override flags");
    add_train_flags(train, train_flags, train_overrides);
    train->callback([&]() {
        train_overrides.apply(train_config);
        exit_code = cmd_train(train_data, train_out, train_flags);
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
    std::string eval_data, eval_model, eval_out, eval_config;
    std::string eval_mode = "zsl";
    std::string eval_spaces = "all";
    std::string eval_format = "text";
    bool eval_dump = false;
    ConfigOverrides eval_overrides;
    eval->add_option("--data", eval_data, "Dataset manifest")->required();
    eval->add_option("--model", eval_model, "Model directory or manifest")->required();
    eval->add_option("--out", eval_out, "Output directory")->envname("CDL_OUTPUT_DIR");
    eval->add_option("--mode", eval_mode, "zsl or gzsl");
    eval->add_option("--spaces", eval_spaces,
                     "Comma-separated space combinations (v,a,s,va,...) or 'all'");
    eval->add_option("--format", eval_format, "Matrix file format for --export-matrices");
    eval->add_flag("--export-matrices", eval_dump,
                   "Write prototype and similarity matrices for external plotting");
    eval->add_option("--config", eval_config, "JSON config; values override flags");
    eval_overrides.bind("mode", &eval_mode);
    eval_overrides.bind("spaces", &eval_spaces);
    eval_overrides.bind("format", &eval_format);
    eval_overrides.bind("export-matrices", &eval_dump);
    eval->callback([&]() {
        eval_overrides.apply(eval_config);
        exit_code = cmd_eval(eval_data, eval_model, eval_out, eval_mode, eval_spaces,
                             eval_dump, eval_format);
    });

    // gridsearch
    auto* grid =
        app.add_subcommand("gridsearch", "Search hyperparameters on the validation split");
    std::string grid_data, grid_out, grid_config;
    TrainFlags grid_flags;
    ConfigOverrides grid_overrides;
    std::string grid_lambda = "0.001,0.01,0.1,1,10";
    std::string grid_alpha = "0.001,0.01,0.1,1,10";
    std::string grid_beta = "0.001,0.01,0.1,1,10";
    std::string grid_gamma = "0.001,0.01,0.1,1,10";
    std::string rank_space = "va";
    grid->add_option("--data", grid_data, "Dataset manifest")->required();
    grid->add_option("--out", grid_out, "Output directory")->envname("CDL_OUTPUT_DIR");
    grid->add_option("--grid-lambda", grid_lambda, "Comma-separated lambda values");
    grid->add_option("--grid-alpha", grid_alpha, "Comma-separated alpha values");
    grid->add_option("--grid-beta", grid_beta, "Comma-separated beta values");
    grid->add_option("--grid-gamma", grid_gamma, "Comma-separated gamma values");
    grid->add_option("--rank-space", rank_space, "Space combination used for ranking");
    grid->add_option("--config", grid_config, "JSON config; values override flags");
    add_train_flags(grid, grid_flags, grid_overrides);
    grid_overrides.bind("grid-lambda", &grid_lambda);
    grid_overrides.bind("grid-alpha", &grid_alpha);
    grid_overrides.bind("grid-beta", &grid_beta);
    grid_overrides.bind("grid-gamma", &grid_gamma);
    grid_overrides.bind("rank-space", &rank_space);
    grid->callback([&]() {
        grid_overrides.apply(grid_config);
        exit_code = cmd_gridsearch(grid_data, grid_out, grid_flags, grid_lambda, grid_alpha,
                                   grid_beta, grid_gamma, rank_space);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cdl::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const cdl::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return exit_code;
}
