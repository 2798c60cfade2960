#pragma once

#include <cdl/matrix_io.hpp>
#include <cdl/model.hpp>

#include <filesystem>

namespace cdl {

// A saved model is a directory holding "model.cdl" (key = value manifest with
// hyperparameters, variant, run metadata, and matrix file references),
// the matrix files, and "trace.csv".

void save_model(const CdlModel& model, const std::filesystem::path& directory,
                MatrixFormat format = MatrixFormat::Text);

/// Accepts the directory or the manifest path itself.
CdlModel load_model(const std::filesystem::path& path);

}  // namespace cdl
