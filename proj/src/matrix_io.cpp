#include <cdl/matrix_io.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cdl {

namespace {

std::ifstream open_input(const std::filesystem::path& file, std::ios::openmode mode) {
    std::ifstream in(file, mode);
    if (!in) throw DataError("cannot open file for reading: " + file.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& file, std::ios::openmode mode) {
    std::ofstream out(file, mode);
    if (!out) throw DataError("cannot open file for writing: " + file.string());
    return out;
}

[[noreturn]] void malformed(const std::filesystem::path& file, const std::string& what) {
    throw DataError(file.string() + ": " + what);
}

Matrix read_matrix_text(const std::filesystem::path& file) {
    std::ifstream in = open_input(file, std::ios::in);
    std::int64_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) malformed(file, "missing 'rows cols' header");
    if (rows < 1 || cols < 1) malformed(file, "header declares an empty matrix");
    Matrix m(rows, cols);
    std::string token;
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t j = 0; j < cols; ++j) {
            if (!(in >> token)) {
                std::ostringstream os;
                os << "truncated or unparsable value at row " << i << ", column " << j;
                malformed(file, os.str());
            }
            // strtod so that forms like "nan"/"inf" parse and are then
            // rejected as non-finite rather than as syntax errors.
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end != token.c_str() + token.size()) {
                std::ostringstream os;
                os << "truncated or unparsable value at row " << i << ", column " << j;
                malformed(file, os.str());
            }
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "non-finite value at row " << i << ", column " << j;
                malformed(file, os.str());
            }
            m(i, j) = v;
        }
    }
    std::string trailing;
    if (in >> trailing) malformed(file, "trailing data after the declared entries");
    return m;
}

Matrix read_matrix_binary(const std::filesystem::path& file) {
    std::ifstream in = open_input(file, std::ios::in | std::ios::binary);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) malformed(file, "truncated binary header");
    if (rows < 1 || cols < 1) malformed(file, "header declares an empty matrix");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::vector<double> row(cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(cols * sizeof(double)));
        if (!in) {
            std::ostringstream os;
            os << "truncated payload at row " << i;
            malformed(file, os.str());
        }
        for (std::uint64_t j = 0; j < cols; ++j) {
            if (!std::isfinite(row[j])) {
                std::ostringstream os;
                os << "non-finite value at row " << i << ", column " << j;
                malformed(file, os.str());
            }
            m(static_cast<Index>(i), static_cast<Index>(j)) = row[j];
        }
    }
    char extra = 0;
    if (in.read(&extra, 1)) malformed(file, "trailing data after the declared entries");
    return m;
}

}  // namespace

MatrixFormat format_for(const std::filesystem::path& file) {
    return file.extension() == ".bin" ? MatrixFormat::Binary : MatrixFormat::Text;
}

std::string matrix_extension(MatrixFormat format) {
    return format == MatrixFormat::Binary ? "bin" : "txt";
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Matrix read_matrix(const std::filesystem::path& file) {
    return format_for(file) == MatrixFormat::Binary ? read_matrix_binary(file)
                                                    : read_matrix_text(file);
}

void write_matrix(const Matrix& m, const std::filesystem::path& file) {
    detail::ensure_nonempty(m, "matrix", "write_matrix");
    detail::ensure_finite(m, "matrix", "write_matrix");
    if (format_for(file) == MatrixFormat::Binary) {
        std::ofstream out = open_output(file, std::ios::out | std::ios::binary);
        const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
        const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
        out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
        out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
        std::vector<double> row(cols);
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(cols * sizeof(double)));
        }
        if (!out) throw DataError("write failed: " + file.string());
    } else {
        std::ofstream out = open_output(file, std::ios::out);
        out << m.rows() << " " << m.cols() << "\n";
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) {
                if (j > 0) out << " ";
                out << format_double(m(i, j));
            }
            out << "\n";
        }
        if (!out) throw DataError("write failed: " + file.string());
    }
}

std::vector<int> read_labels(const std::filesystem::path& file) {
    std::ifstream in = open_input(file, std::ios::in);
    std::vector<int> labels;
    long long v = 0;
    while (in >> v) labels.push_back(static_cast<int>(v));
    if (!in.eof()) malformed(file, "unparsable label entry");
    if (labels.empty()) malformed(file, "no labels found");
    return labels;
}

void write_labels(const std::vector<int>& labels, const std::filesystem::path& file) {
    std::ofstream out = open_output(file, std::ios::out);
    for (int v : labels) out << v << "\n";
    if (!out) throw DataError("write failed: " + file.string());
}

std::vector<std::string> read_names(const std::filesystem::path& file) {
    std::ifstream in = open_input(file, std::ios::in);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        names.push_back(line.substr(begin, end - begin + 1));
    }
    if (names.empty()) malformed(file, "no names found");
    return names;
}

void write_names(const std::vector<std::string>& names, const std::filesystem::path& file) {
    std::ofstream out = open_output(file, std::ios::out);
    for (const auto& n : names) out << n << "\n";
    if (!out) throw DataError("write failed: " + file.string());
}

}  // namespace cdl
