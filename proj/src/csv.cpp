#include "tdepth/csv.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r;");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r;");
    return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

void check_skip_ratio(std::size_t skipped, std::size_t rows, const std::string& path) {
    if (rows == 0) throw InputError(path + " contains no data rows");
    if (static_cast<double>(skipped) > 0.01 * static_cast<double>(rows)) {
        throw InputError(path + ": " + std::to_string(skipped) + " of " + std::to_string(rows) +
                         " rows malformed (more than 1%)");
    }
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::string& path) : out_(&std::cout) {
    if (path != "-") {
        file_.open(path);
        if (!file_) throw IoError("cannot write " + path);
        out_ = &file_;
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) *out_ << ',';
        *out_ << cells[i];
    }
    *out_ << '\n';
    if (!*out_) throw IoError("write failed");
}

void CsvWriter::flush() { out_->flush(); }

Matrix read_stream_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + " is empty");
    const auto header = split(trim(line));
    if (header.size() < 2 || trim(header[0]) != "n") {
        throw InputError(path + ": expected header n,x1,...,xp");
    }
    const auto dim = static_cast<Eigen::Index>(header.size() - 1);
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t skipped = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++rows;
        const auto cells = split(line);
        if (static_cast<Eigen::Index>(cells.size()) != dim + 1) {
            ++skipped;
            continue;
        }
        std::vector<double> row(static_cast<std::size_t>(dim));
        bool ok = true;
        for (Eigen::Index i = 0; i < dim && ok; ++i) ok = parse_double(cells[static_cast<std::size_t>(i + 1)], row[static_cast<std::size_t>(i)]);
        if (!ok) {
            ++skipped;
            continue;
        }
        values.insert(values.end(), row.begin(), row.end());
    }
    check_skip_ratio(skipped, rows, path);
    const auto n = static_cast<Eigen::Index>(values.size()) / dim;
    return Eigen::Map<const Matrix>(values.data(), dim, n);
}

LabeledData read_labeled_csv(const std::string& path, bool wisdm) {
    std::ifstream in = open_input(path);
    std::string line;
    LabeledData out;
    std::map<std::string, int> ids;
    std::vector<double> values;
    Eigen::Index dim = 3;
    std::size_t value_first = 3;

    if (!wisdm) {
        if (!std::getline(in, line)) throw InputError(path + " is empty");
        const auto header = split(trim(line));
        if (header.size() < 4 || trim(header.front()) != "n" || trim(header.back()) != "label") {
            throw InputError(path + ": expected header n,x1,...,xp,label");
        }
        dim = static_cast<Eigen::Index>(header.size() - 2);
        value_first = 1;
    }

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++out.rows;
        const auto cells = split(trim(line));
        const std::size_t expected = static_cast<std::size_t>(dim) + (wisdm ? 3 : 2);
        if (cells.size() != expected) {
            ++out.skipped;
            continue;
        }
        std::vector<double> row(static_cast<std::size_t>(dim));
        bool ok = true;
        for (std::size_t i = 0; i < row.size() && ok; ++i) ok = parse_double(cells[value_first + i], row[i]);
        const std::string label = wisdm ? trim(cells[0]) + "/" + trim(cells[1]) : trim(cells.back());
        if (!ok || label.empty()) {
            ++out.skipped;
            continue;
        }
        auto [it, inserted] = ids.emplace(label, static_cast<int>(out.label_names.size()));
        if (inserted) out.label_names.push_back(label);
        out.labels.push_back(it->second);
        values.insert(values.end(), row.begin(), row.end());
    }
    check_skip_ratio(out.skipped, out.rows, path);
    out.data = Eigen::Map<const Matrix>(values.data(), dim, static_cast<Eigen::Index>(out.labels.size()));
    return out;
}

}  // namespace tdepth
