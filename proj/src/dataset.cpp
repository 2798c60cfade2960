#include <cdl/dataset.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cdl {

namespace {

void check_labels(const std::vector<int>& labels, Index classes,
                  const std::string& what) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            std::ostringstream os;
            os << what << ": label " << labels[i] << " at position " << i
               << " is outside the registry range [0, " << classes << ")";
            throw DataError(os.str());
        }
    }
}

void check_registry(const std::vector<std::string>& names, const std::string& what) {
    if (names.empty()) throw DataError(what + ": registry is empty");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw DataError(what + ": registry contains an empty name");
        if (!seen.insert(n).second) {
            throw DataError(what + ": duplicate class name '" + n + "'");
        }
    }
}

}  // namespace

void Dataset::validate() const {
    check_registry(seen_class_names, "seen classes");
    check_registry(unseen_class_names, "unseen classes");
    for (const auto& n : unseen_class_names) {
        if (std::find(seen_class_names.begin(), seen_class_names.end(), n) !=
            seen_class_names.end()) {
            throw DataError("class '" + n + "' appears in both the seen and unseen registries");
        }
    }

    detail::ensure_nonempty(train_features, "train_features", "dataset");
    detail::ensure_nonempty(seen_semantics, "seen_semantics", "dataset");
    detail::ensure_nonempty(unseen_semantics, "unseen_semantics", "dataset");
    detail::ensure_finite(train_features, "train_features", "dataset");
    detail::ensure_finite(seen_semantics, "seen_semantics", "dataset");
    detail::ensure_finite(unseen_semantics, "unseen_semantics", "dataset");

    detail::ensure_same(static_cast<Index>(train_labels.size()), train_features.cols(),
                        "train label count", "train feature columns", "dataset");
    detail::ensure_same(seen_semantics.cols(), seen_classes(),
                        "seen semantic columns", "seen registry size", "dataset");
    detail::ensure_same(unseen_semantics.cols(), unseen_classes(),
                        "unseen semantic columns", "unseen registry size", "dataset");
    detail::ensure_same(unseen_semantics.rows(), seen_semantics.rows(),
                        "unseen semantic rows", "seen semantic rows", "dataset");
    check_labels(train_labels, seen_classes(), "train labels");

    if (has_unseen_test() || !test_unseen_labels.empty()) {
        detail::ensure_nonempty(test_unseen_features, "test_unseen_features", "dataset");
        detail::ensure_finite(test_unseen_features, "test_unseen_features", "dataset");
        detail::ensure_same(test_unseen_features.rows(), feature_dim(),
                            "test_unseen feature rows", "train feature rows", "dataset");
        detail::ensure_same(static_cast<Index>(test_unseen_labels.size()),
                            test_unseen_features.cols(), "test_unseen label count",
                            "test_unseen feature columns", "dataset");
        check_labels(test_unseen_labels, unseen_classes(), "test_unseen labels");
    }
    if (has_seen_test() || !test_seen_labels.empty()) {
        detail::ensure_nonempty(test_seen_features, "test_seen_features", "dataset");
        detail::ensure_finite(test_seen_features, "test_seen_features", "dataset");
        detail::ensure_same(test_seen_features.rows(), feature_dim(),
                            "test_seen feature rows", "train feature rows", "dataset");
        detail::ensure_same(static_cast<Index>(test_seen_labels.size()),
                            test_seen_features.cols(), "test_seen label count",
                            "test_seen feature columns", "dataset");
        check_labels(test_seen_labels, seen_classes(), "test_seen labels");
    }

    for (const auto& n : validation_class_names) {
        if (std::find(seen_class_names.begin(), seen_class_names.end(), n) ==
            seen_class_names.end()) {
            throw DataError("validation class '" + n + "' is not in the seen registry");
        }
    }
    if (!validation_class_names.empty() &&
        validation_class_names.size() >= seen_class_names.size()) {
        throw DataError("validation classes must leave at least one seen class for training");
    }
}

Dataset load_dataset(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw DataError("cannot open manifest: " + manifest.string());

    static const std::set<std::string> known_keys = {
        "features",       "labels",          "semantics_seen",     "semantics_unseen",
        "seen_classes",   "unseen_classes",  "test_unseen_features",
        "test_unseen_labels", "test_seen_features", "test_seen_labels",
        "validation_classes"};

    std::map<std::string, std::filesystem::path> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                std::ostringstream os;
                os << manifest.string() << ":" << line_no << ": expected 'key = value'";
                throw DataError(os.str());
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys.count(key)) {
            std::ostringstream os;
            os << manifest.string() << ":" << line_no << ": unknown key '" << key << "'";
            throw DataError(os.str());
        }
        if (value.empty()) {
            std::ostringstream os;
            os << manifest.string() << ":" << line_no << ": key '" << key << "' has no value";
            throw DataError(os.str());
        }
        if (entries.count(key)) {
            std::ostringstream os;
            os << manifest.string() << ":" << line_no << ": duplicate key '" << key << "'";
            throw DataError(os.str());
        }
        entries[key] = manifest.parent_path() / value;
    }

    auto require = [&](const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) {
            throw DataError(manifest.string() + ": missing required key '" + key + "'");
        }
        return it->second;
    };
    auto optional = [&](const std::string& key) -> const std::filesystem::path* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto require_pair = [&](const std::string& a, const std::string& b) {
        if ((entries.count(a) != 0) != (entries.count(b) != 0)) {
            throw DataError(manifest.string() + ": keys '" + a + "' and '" + b +
                            "' must be given together");
        }
    };
    require_pair("test_unseen_features", "test_unseen_labels");
    require_pair("test_seen_features", "test_seen_labels");

    Dataset data;
    data.train_features = read_matrix(require("features"));
    data.train_labels = read_labels(require("labels"));
    data.seen_semantics = read_matrix(require("semantics_seen"));
    data.unseen_semantics = read_matrix(require("semantics_unseen"));
    data.seen_class_names = read_names(require("seen_classes"));
    data.unseen_class_names = read_names(require("unseen_classes"));
    if (const auto* p = optional("test_unseen_features")) data.test_unseen_features = read_matrix(*p);
    if (const auto* p = optional("test_unseen_labels")) data.test_unseen_labels = read_labels(*p);
    if (const auto* p = optional("test_seen_features")) data.test_seen_features = read_matrix(*p);
    if (const auto* p = optional("test_seen_labels")) data.test_seen_labels = read_labels(*p);
    if (const auto* p = optional("validation_classes")) data.validation_class_names = read_names(*p);

    try {
        data.validate();
    } catch (const Error& e) {
        throw DataError(manifest.string() + ": " + e.what());
    }
    return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& manifest,
                  MatrixFormat format) {
    data.validate();
    const auto dir = manifest.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const std::string ext = matrix_extension(format);

    std::ofstream out(manifest);
    if (!out) throw DataError("cannot open manifest for writing: " + manifest.string());

    auto put_matrix = [&](const std::string& key, const std::string& stem, const Matrix& m) {
        const std::string file = stem + "." + ext;
        write_matrix(m, dir / file);
        out << key << " = " << file << "\n";
    };
    auto put_labels = [&](const std::string& key, const std::string& file,
                          const std::vector<int>& labels) {
        write_labels(labels, dir / file);
        out << key << " = " << file << "\n";
    };
    auto put_names = [&](const std::string& key, const std::string& file,
                         const std::vector<std::string>& names) {
        write_names(names, dir / file);
        out << key << " = " << file << "\n";
    };

    put_matrix("features", "train_features", data.train_features);
    put_labels("labels", "train_labels.txt", data.train_labels);
    put_matrix("semantics_seen", "semantics_seen", data.seen_semantics);
    put_matrix("semantics_unseen", "semantics_unseen", data.unseen_semantics);
    put_names("seen_classes", "seen_classes.txt", data.seen_class_names);
    put_names("unseen_classes", "unseen_classes.txt", data.unseen_class_names);
    if (data.has_unseen_test()) {
        put_matrix("test_unseen_features", "test_unseen_features", data.test_unseen_features);
        put_labels("test_unseen_labels", "test_unseen_labels.txt", data.test_unseen_labels);
    }
    if (data.has_seen_test()) {
        put_matrix("test_seen_features", "test_seen_features", data.test_seen_features);
        put_labels("test_seen_labels", "test_seen_labels.txt", data.test_seen_labels);
    }
    if (!data.validation_class_names.empty()) {
        put_names("validation_classes", "validation_classes.txt", data.validation_class_names);
    }
    if (!out) throw DataError("write failed: " + manifest.string());
}

void normalize_feature_columns(Matrix& features) {
    for (Index j = 0; j < features.cols(); ++j) {
        const double norm = features.col(j).norm();
        if (norm > 0.0) features.col(j) /= norm;
    }
}

Dataset make_validation_split(const Dataset& data) {
    data.validate();
    if (data.validation_class_names.empty()) {
        throw DataError("dataset has no validation_classes; cannot build a validation split");
    }

    std::vector<Index> held_out, kept;
    for (Index k = 0; k < data.seen_classes(); ++k) {
        const auto& name = data.seen_class_names[static_cast<std::size_t>(k)];
        const bool is_val =
            std::find(data.validation_class_names.begin(), data.validation_class_names.end(),
                      name) != data.validation_class_names.end();
        (is_val ? held_out : kept).push_back(k);
    }

    std::vector<int> old_to_kept(static_cast<std::size_t>(data.seen_classes()), -1);
    std::vector<int> old_to_held(static_cast<std::size_t>(data.seen_classes()), -1);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        old_to_kept[static_cast<std::size_t>(kept[i])] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < held_out.size(); ++i) {
        old_to_held[static_cast<std::size_t>(held_out[i])] = static_cast<int>(i);
    }

    Dataset split;
    split.seen_semantics.resize(data.semantic_dim(), static_cast<Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        split.seen_semantics.col(static_cast<Index>(i)) = data.seen_semantics.col(kept[i]);
        split.seen_class_names.push_back(data.seen_class_names[static_cast<std::size_t>(kept[i])]);
    }
    split.unseen_semantics.resize(data.semantic_dim(), static_cast<Index>(held_out.size()));
    for (std::size_t i = 0; i < held_out.size(); ++i) {
        split.unseen_semantics.col(static_cast<Index>(i)) = data.seen_semantics.col(held_out[i]);
        split.unseen_class_names.push_back(
            data.seen_class_names[static_cast<std::size_t>(held_out[i])]);
    }

    std::vector<Index> train_cols, val_cols;
    for (Index i = 0; i < data.train_samples(); ++i) {
        const int label = data.train_labels[static_cast<std::size_t>(i)];
        if (old_to_kept[static_cast<std::size_t>(label)] >= 0) {
            train_cols.push_back(i);
        } else {
            val_cols.push_back(i);
        }
    }
    if (train_cols.empty()) throw DataError("validation split leaves no training samples");
    if (val_cols.empty()) throw DataError("validation split has no held-out samples");

    split.train_features.resize(data.feature_dim(), static_cast<Index>(train_cols.size()));
    for (std::size_t i = 0; i < train_cols.size(); ++i) {
        split.train_features.col(static_cast<Index>(i)) = data.train_features.col(train_cols[i]);
        split.train_labels.push_back(
            old_to_kept[static_cast<std::size_t>(
                data.train_labels[static_cast<std::size_t>(train_cols[i])])]);
    }
    split.test_unseen_features.resize(data.feature_dim(), static_cast<Index>(val_cols.size()));
    for (std::size_t i = 0; i < val_cols.size(); ++i) {
        split.test_unseen_features.col(static_cast<Index>(i)) = data.train_features.col(val_cols[i]);
        split.test_unseen_labels.push_back(
            old_to_held[static_cast<std::size_t>(
                data.train_labels[static_cast<std::size_t>(val_cols[i])])]);
    }

    split.validate();
    return split;
}

}  // namespace cdl
