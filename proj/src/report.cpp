#include <cdl/report.hpp>

#include <cdl/matrix_io.hpp>

#include <fstream>
#include <sstream>

namespace cdl {

namespace {

using nlohmann::json;

json accuracy_to_json(const PerClassAccuracy& acc, const std::vector<std::string>& names) {
    json per_class = json::object();
    json counts = json::object();
    for (const auto& [cls, value] : acc.per_class) {
        const auto& key = names.at(static_cast<std::size_t>(cls));
        per_class[key] = value;
        counts[key] = acc.class_counts.at(cls);
    }
    return json{{"overall", acc.overall},
                {"per_class", std::move(per_class)},
                {"class_counts", std::move(counts)}};
}

PerClassAccuracy accuracy_from_json(const json& j, const std::vector<std::string>& names) {
    PerClassAccuracy acc;
    acc.overall = j.at("overall").get<double>();
    auto id_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return static_cast<int>(i);
        }
        throw DataError("report: class '" + name + "' is not in the stored registry");
    };
    for (const auto& [name, value] : j.at("per_class").items()) {
        acc.per_class[id_of(name)] = value.get<double>();
    }
    for (const auto& [name, value] : j.at("class_counts").items()) {
        acc.class_counts[id_of(name)] = value.get<int>();
    }
    return acc;
}

}  // namespace

json report_to_json(const EvalReport& report) {
    json results = json::array();
    for (const auto& entry : report.entries) {
        json row{{"spaces", entry.spaces}};
        if (report.mode == "gzsl") {
            row["ts"] = entry.unseen.overall;
            row["tr"] = entry.seen.overall;
            row["H"] = entry.hmean;
            row["unseen_detail"] = accuracy_to_json(entry.unseen, report.class_names);
            row["seen_detail"] = accuracy_to_json(entry.seen, report.class_names);
        } else {
            row["accuracy"] = entry.accuracy.overall;
            row["detail"] = accuracy_to_json(entry.accuracy, report.class_names);
        }
        results.push_back(std::move(row));
    }
    return json{{"mode", report.mode},
                {"class_names", report.class_names},
                {"results", std::move(results)},
                {"test_unseen_count", report.unseen_test_count},
                {"test_seen_count", report.seen_test_count}};
}

EvalReport report_from_json(const json& j) {
    EvalReport report;
    report.mode = j.at("mode").get<std::string>();
    report.class_names = j.at("class_names").get<std::vector<std::string>>();
    report.unseen_test_count = j.at("test_unseen_count").get<Index>();
    report.seen_test_count = j.at("test_seen_count").get<Index>();
    for (const auto& row : j.at("results")) {
        EvalReport::Entry entry;
        entry.spaces = row.at("spaces").get<std::string>();
        if (report.mode == "gzsl") {
            entry.unseen = accuracy_from_json(row.at("unseen_detail"), report.class_names);
            entry.seen = accuracy_from_json(row.at("seen_detail"), report.class_names);
            entry.hmean = row.at("H").get<double>();
        } else {
            entry.accuracy = accuracy_from_json(row.at("detail"), report.class_names);
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot open trace file for writing: " + file.string());
    out << "iter,step1,step2,step3,step4,step5,step6,"
           "total,seen_align,unseen_align,prototype_fit\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& it = trace.iterations[i];
        out << (i + 1);
        for (double v : it.step_total) out << "," << format_double(v);
        out << "," << format_double(it.end.total) << "," << format_double(it.end.seen_align)
            << "," << format_double(it.end.unseen_align) << ","
            << format_double(it.end.prototype_fit) << "\n";
    }
    if (!out) throw DataError("write failed: " + file.string());
}

TrainingTrace::Iteration parse_trace_row(const std::string& line) {
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) fields.push_back(std::stod(token));
    if (fields.size() != 11) {
        throw DataError("trace row has " + std::to_string(fields.size()) +
                        " fields, expected 11");
    }
    TrainingTrace::Iteration it;
    for (std::size_t s = 0; s < 6; ++s) it.step_total[s] = fields[s + 1];
    it.end.total = fields[7];
    it.end.seen_align = fields[8];
    it.end.unseen_align = fields[9];
    it.end.prototype_fit = fields[10];
    return it;
}

std::vector<TrainingTrace::Iteration> read_trace_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open trace file: " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(file.string() + ": missing header");
    std::vector<TrainingTrace::Iteration> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            rows.push_back(parse_trace_row(line));
        } catch (const std::exception& e) {
            throw DataError(file.string() + ": " + e.what());
        }
    }
    return rows;
}

void export_report(const EvalReport& report, const TrainingTrace& trace,
                   const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    json j = report_to_json(report);
    j["iterations_run"] = trace.iterations_run();
    j["converged"] = trace.converged;
    j["initial_loss"] = trace.initial.total;
    j["final_loss"] =
        trace.iterations.empty() ? trace.initial.total : trace.iterations.back().end.total;

    std::ofstream out(directory / "report.json");
    if (!out) {
        throw DataError("cannot open report for writing: " +
                        (directory / "report.json").string());
    }
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + (directory / "report.json").string());

    write_trace_csv(trace, directory / "trace.csv");
}

}  // namespace cdl
