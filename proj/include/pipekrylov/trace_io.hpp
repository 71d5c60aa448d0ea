#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pipekrylov/perfmodel.hpp"
#include "pipekrylov/solver.hpp"

namespace pipekrylov::io {

inline constexpr std::string_view kTraceHeader =
    "iter,rnorm_natural,rnorm_true,relerr,nu_used,red_blocking,red_overlapped,overlap_tags,breakdown,restarted";
inline constexpr std::string_view kPerfHeader = "nodes,method,t_calc,t_red,t_total";

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
/// Throws ParseError unless the whole field is a number.
double parse_double(std::string_view s);

void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// Long format with a leading `method` column.
struct LabelledTrace {
  std::string method;
  IterationTrace trace;
};
void write_compare_csv(std::ostream& os, const std::vector<LabelledTrace>& runs);

/// Reads either layout. Rows of a plain trace get an empty method label;
/// consecutive rows with the same label are grouped.
std::vector<LabelledTrace> read_trace_csv(std::istream& is);

void write_perf_csv(std::ostream& os, const std::vector<perf::SweepRow>& rows);
std::vector<perf::SweepRow> read_perf_csv(std::istream& is);

}  // namespace pipekrylov::io
