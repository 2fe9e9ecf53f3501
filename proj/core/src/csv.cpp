#include "mmvlab/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mmv {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points) {
    CsvWriter w(out, {"theta", "mean", "variance"});
    for (const auto& p : points) w.row({format_number(p.theta), format_number(p.mean), format_number(p.variance)});
}

void write_trajectory_csv(std::ostream& out, const PathRecord& path) {
    CsvWriter w(out, {"t", "x", "y", "pi", "u", "stock_proxy"});
    for (std::size_t k = 0; k < path.t.size(); ++k) {
        w.row({format_number(path.t[k]), format_number(path.x[k]), format_number(path.y[k]),
               format_number(path.controls[k].pi), format_number(path.controls[k].u),
               format_number(path.stock[k])});
    }
}

void write_jump_log_csv(std::ostream& out, const PathRecord& path) {
    CsvWriter w(out, {"t", "z"});
    for (const auto& j : path.jumps) w.row({format_number(j.time), format_number(j.size)});
}

void write_saddle_report_csv(std::ostream& out, const SaddleReport& report) {
    CsvWriter w(out, {"t", "x", "y", "control", "delta", "generator_value"});
    for (const auto& r : report.rows) {
        w.row({format_number(r.t), format_number(r.x), format_number(r.y), r.control, format_number(r.delta),
               format_number(r.generator_value)});
    }
}

DiscreteRv read_atoms_csv(std::istream& in) {
    std::vector<Atom> atoms;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("atom CSV rows need value,prob");
        std::istringstream vs(line.substr(0, comma)), ps(line.substr(comma + 1));
        Atom a;
        if (!(vs >> a.value) || !(ps >> a.prob)) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw std::invalid_argument("malformed atom CSV row: " + line);
        }
        first = false;
        atoms.push_back(a);
    }
    return DiscreteRv(std::move(atoms));
}

}  // namespace mmv
