#include "pipekrylov/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "pipekrylov/errors.hpp"

namespace pipekrylov::io {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto cut = line.find(',');
    out.push_back(line.substr(0, cut));
    if (cut == std::string_view::npos) break;
    line.remove_prefix(cut + 1);
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("not an integer: '" + std::string(s) + "'");
  return v;
}

bool parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError("expected 0 or 1, got '" + std::string(s) + "'");
}

std::optional<double> parse_optional(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

void write_record(std::ostream& os, const IterationRecord& r) {
  os << r.iter << ',' << format_double(r.rnorm_natural) << ','
     << (r.rnorm_true ? format_double(*r.rnorm_true) : "") << ','
     << (r.relerr ? format_double(*r.relerr) : "") << ',' << r.nu_used << ',' << r.red_blocking << ','
     << r.red_overlapped << ',' << r.overlap_tags.to_string() << ',' << (r.breakdown ? 1 : 0) << ','
     << (r.restarted ? 1 : 0) << '\n';
}

IterationRecord parse_record(const std::vector<std::string_view>& f, std::size_t off) {
  IterationRecord r;
  r.iter = parse_int<int>(f[off + 0]);
  r.rnorm_natural = parse_double(f[off + 1]);
  r.rnorm_true = parse_optional(f[off + 2]);
  r.relerr = parse_optional(f[off + 3]);
  r.nu_used = parse_int<int>(f[off + 4]);
  r.red_blocking = parse_int<int>(f[off + 5]);
  r.red_overlapped = parse_int<int>(f[off + 6]);
  const auto tags = OverlapTags::parse(f[off + 7]);
  if (!tags) throw ParseError("bad overlap_tags '" + std::string(f[off + 7]) + "'");
  r.overlap_tags = *tags;
  r.breakdown = parse_flag(f[off + 8]);
  r.restarted = parse_flag(f[off + 9]);
  return r;
}

bool next_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ParseError("format_double: buffer too small");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace) write_record(os, r);
}

void write_compare_csv(std::ostream& os, const std::vector<LabelledTrace>& runs) {
  os << "method," << kTraceHeader << '\n';
  for (const auto& run : runs) {
    for (const auto& r : run.trace) {
      os << run.method << ',';
      write_record(os, r);
    }
  }
}

std::vector<LabelledTrace> read_trace_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw ParseError("empty trace file");
  std::size_t off = 0;
  if (line == kTraceHeader) {
    off = 0;
  } else if (line == "method," + std::string(kTraceHeader)) {
    off = 1;
  } else {
    throw ParseError("unrecognized trace header '" + line + "'");
  }
  std::vector<LabelledTrace> out;
  int lineno = 1;
  while (next_line(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 10 + off) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(10 + off) + " fields");
    }
    const std::string method = off ? std::string(f[0]) : std::string();
    if (out.empty() || out.back().method != method) out.push_back({method, {}});
    out.back().trace.push_back(parse_record(f, off));
  }
  return out;
}

void write_perf_csv(std::ostream& os, const std::vector<perf::SweepRow>& rows) {
  os << kPerfHeader << '\n';
  for (const auto& r : rows) {
    os << r.nodes << ',' << to_string(r.method) << ',' << format_double(r.cost.t_calc) << ','
       << format_double(r.cost.t_red) << ',' << format_double(r.cost.total()) << '\n';
  }
}

std::vector<perf::SweepRow> read_perf_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line) || line != kPerfHeader) throw ParseError("unrecognized perfmodel header");
  std::vector<perf::SweepRow> out;
  while (next_line(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw ParseError("perfmodel row: expected 5 fields");
    perf::SweepRow row;
    row.nodes = parse_int<std::uint64_t>(f[0]);
    const auto m = parse_method(f[1]);
    if (!m) throw ParseError("unknown method '" + std::string(f[1]) + "'");
    row.method = *m;
    row.cost.t_calc = parse_double(f[2]);
    row.cost.t_red = parse_double(f[3]);
    out.push_back(row);
  }
  return out;
}

}  // namespace pipekrylov::io
