#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "tdepth/geometry.hpp"

namespace tdepth {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

class CsvWriter {
public:
    /// "-" writes to stdout. Throws IoError if the file cannot be opened.
    explicit CsvWriter(const std::string& path);

    void row(const std::vector<std::string>& cells);
    void flush();

private:
    std::ofstream file_;
    std::ostream* out_;
};

/// Stream file with header `n,x1,...,xp`; returns p x rows.
Matrix read_stream_csv(const std::string& path);

struct LabeledData {
    Matrix data;              ///< p x n
    std::vector<int> labels;  ///< dense ids in first-seen order
    std::vector<std::string> label_names;
    std::size_t rows = 0;     ///< data rows seen (header excluded)
    std::size_t skipped = 0;  ///< malformed rows dropped
};

/// Parses `n,x1..xp,label` or, when `wisdm` is set, the raw WISDM layout
/// `user,activity,timestamp,x,y,z[;]` (the label is user + activity, so a user
/// switch also counts as a change). Malformed rows are skipped; more than 1%
/// skipped raises InputError.
LabeledData read_labeled_csv(const std::string& path, bool wisdm = false);

}  // namespace tdepth
