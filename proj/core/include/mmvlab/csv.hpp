#pragma once
// CSV import/export. '.' decimal separator, LF line endings, header row
// always present. Numbers use the shortest round-trip representation.

#include <iosfwd>
#include <string>
#include <vector>

#include "mmvlab/closed_form.hpp"
#include "mmvlab/mmv_discrete.hpp"
#include "mmvlab/sde_engine.hpp"
#include "mmvlab/verifier.hpp"

namespace mmv {

std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    std::size_t columns_;
};

void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points);
void write_trajectory_csv(std::ostream& out, const PathRecord& path);
void write_jump_log_csv(std::ostream& out, const PathRecord& path);
void write_saddle_report_csv(std::ostream& out, const SaddleReport& report);

// Two columns value,prob; an optional non-numeric header line is skipped.
DiscreteRv read_atoms_csv(std::istream& in);

}  // namespace mmv
