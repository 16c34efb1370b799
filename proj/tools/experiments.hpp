#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"

namespace corrheston::cli {

using Cell = std::variant<double, std::size_t, std::string>;

/// CSV with a fixed header. Doubles use the shortest text that parses back to
/// the same value, so identical inputs give byte-identical files.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    void row(const std::vector<Cell>& cells);
    /// Marks a sweep that stopped early; the message goes in the second column.
    void failure(const std::string& message);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }

private:
    std::ostream& out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

[[nodiscard]] std::string format_double(double x);

struct Experiment {
    std::string name;
    std::string description;
    bool uses_quote = true;
    bool uses_mc = false;
    std::vector<std::string> header;
    std::function<void(const ExperimentConfig&, CsvWriter&)> run;
};

[[nodiscard]] const std::vector<Experiment>& experiments();

/// Throws ValidationError for unknown names.
[[nodiscard]] const Experiment& find_experiment(const std::string& name);

struct RunSummary {
    std::filesystem::path csv;
    std::filesystem::path manifest;
    std::size_t rows = 0;
};

/// Validates, writes the manifest, runs the experiment into the CSV and
/// finalises the manifest. Errors propagate after the failure is recorded.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace corrheston::cli
