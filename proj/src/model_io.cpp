#include <cdl/model_io.hpp>

#include <cdl/report.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace cdl {

namespace {

constexpr const char* kManifestName = "model.cdl";

const std::map<std::string, Matrix CdlModel::*>& matrix_fields() {
    static const std::map<std::string, Matrix CdlModel::*> fields = {
        {"seen_prototypes", &CdlModel::seen_prototypes},
        {"unseen_prototypes", &CdlModel::unseen_prototypes},
        {"visual_dict", &CdlModel::visual_dict},
        {"semantic_dict", &CdlModel::semantic_dict},
        {"seen_codes", &CdlModel::seen_codes},
        {"unseen_codes", &CdlModel::unseen_codes},
        {"seen_semantics", &CdlModel::seen_semantics},
        {"unseen_semantics", &CdlModel::unseen_semantics},
    };
    return fields;
}

}  // namespace

void save_model(const CdlModel& model, const std::filesystem::path& directory,
                MatrixFormat format) {
    model.check_consistent();
    std::filesystem::create_directories(directory);
    const std::string ext = matrix_extension(format);

    std::ofstream out(directory / kManifestName);
    if (!out) {
        throw DataError("cannot open model manifest for writing: " +
                        (directory / kManifestName).string());
    }
    out << "format_version = 1\n";
    out << "variant = " << variant_name(model.variant) << "\n";
    out << "lambda = " << format_double(model.hp.lambda) << "\n";
    out << "alpha = " << format_double(model.hp.alpha) << "\n";
    out << "beta = " << format_double(model.hp.beta) << "\n";
    out << "gamma = " << format_double(model.hp.gamma) << "\n";
    out << "bases = " << model.visual_dict.cols() << "\n";
    out << "max_iters = " << model.hp.max_iters << "\n";
    out << "rel_tol = " << format_double(model.hp.rel_tol) << "\n";
    out << "ridge_eps = " << format_double(model.hp.ridge_eps) << "\n";
    out << "normalize_features = " << (model.normalized_features ? 1 : 0) << "\n";
    out << "converged = " << (model.trace.converged ? 1 : 0) << "\n";
    out << "initial_total = " << format_double(model.trace.initial.total) << "\n";
    out << "initial_seen_align = " << format_double(model.trace.initial.seen_align) << "\n";
    out << "initial_unseen_align = " << format_double(model.trace.initial.unseen_align) << "\n";
    out << "initial_prototype_fit = " << format_double(model.trace.initial.prototype_fit)
        << "\n";
    out << "trace = trace.csv\n";
    for (const auto& [name, member] : matrix_fields()) {
        const std::string file = name + "." + ext;
        write_matrix(model.*member, directory / file);
        out << name << " = " << file << "\n";
    }
    if (!out) throw DataError("write failed: " + (directory / kManifestName).string());

    write_trace_csv(model.trace, directory / "trace.csv");
}

CdlModel load_model(const std::filesystem::path& path) {
    const std::filesystem::path manifest =
        std::filesystem::is_directory(path) ? path / kManifestName : path;
    std::ifstream in(manifest);
    if (!in) throw DataError("cannot open model manifest: " + manifest.string());

    std::map<std::string, std::string> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto require = [&](const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) {
            throw DataError(manifest.string() + ": missing key '" + key + "'");
        }
        return it->second;
    };
    auto to_double = [&](const std::string& key) {
        try {
            return std::stod(require(key));
        } catch (const std::logic_error&) {
            throw DataError(manifest.string() + ": key '" + key + "' is not a number");
        }
    };

    CdlModel model;
    model.variant = variant_from_name(require("variant"));
    model.hp.lambda = to_double("lambda");
    model.hp.alpha = to_double("alpha");
    model.hp.beta = to_double("beta");
    model.hp.gamma = to_double("gamma");
    model.hp.bases = static_cast<Index>(to_double("bases"));
    model.hp.max_iters = static_cast<int>(to_double("max_iters"));
    model.hp.rel_tol = to_double("rel_tol");
    model.hp.ridge_eps = to_double("ridge_eps");
    model.normalized_features = to_double("normalize_features") != 0.0;
    model.trace.converged = to_double("converged") != 0.0;
    model.trace.initial.total = to_double("initial_total");
    model.trace.initial.seen_align = to_double("initial_seen_align");
    model.trace.initial.unseen_align = to_double("initial_unseen_align");
    model.trace.initial.prototype_fit = to_double("initial_prototype_fit");

    const auto dir = manifest.parent_path();
    for (const auto& [name, member] : matrix_fields()) {
        model.*member = read_matrix(dir / require(name));
    }
    model.trace.iterations = read_trace_csv(dir / require("trace"));

    try {
        model.check_consistent();
    } catch (const Error& e) {
        throw DataError(manifest.string() + ": " + e.what());
    }
    return model;
}

}  // namespace cdl
