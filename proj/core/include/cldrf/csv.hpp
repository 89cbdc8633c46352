#pragma once

#include <filesystem>
#include <string>

#include "cldrf/adrf.hpp"
#include "cldrf/types.hpp"

namespace cldrf {

/// Malformed input: row() is the 1-based line number (header = line 1).
class CsvError : public std::runtime_error {
public:
    CsvError(std::string what, long row)
        : std::runtime_error(std::move(what)), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_;
};

/// %.17g rendering: round-trips any double bit-exactly through text.
std::string format_double(double v);

// Dataset files carry the header "y,t,x1..xp"; label files are
// "unit,<label column>", units 1-based. UTF-8, LF line endings.

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<int>& labels, const std::string& column);
std::vector<int> read_labels_csv(const std::filesystem::path& path);

void write_curves_csv(const std::filesystem::path& path,
                      const std::vector<AdrfCurve>& curves);

}  // namespace cldrf
