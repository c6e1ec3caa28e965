#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include "adaptd/sweep.hpp"

namespace adaptd {
namespace detail {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("csv: not a number: '" + std::string(text) + "'");
  }
  return x;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string csv_safe(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return out;
}

}  // namespace detail

namespace {

template <class T>
T parse_unsigned(std::string_view text) {
  T x{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("csv: not an unsigned integer: '" + std::string(text) + "'");
  }
  return x;
}

}  // namespace

std::string ResultRow::key() const {
  return env_id + "|" + algorithm + "|" + std::to_string(n_rollouts) + "|" + std::to_string(seed);
}

std::string format_result_row(const ResultRow& row) {
  std::string line = row.env_id;
  line += ',';
  line += row.algorithm;
  line += ',';
  line += std::to_string(row.n_rollouts);
  line += ',';
  line += std::to_string(row.seed);
  line += ',';
  line += detail::format_double(row.msve);
  line += ',';
  line += detail::format_double(row.gate_rate);
  line += ',';
  line += detail::format_double(row.wall_time_ms);
  return line;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const ResultRow& r : rows) out << format_result_row(r) << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw std::runtime_error("results csv: unexpected header '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) {
      // An interrupted writer can leave a partial last line; anything else is corrupt.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw std::runtime_error("results csv: line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                               " fields");
    }
    try {
      ResultRow r;
      r.env_id = std::string(f[0]);
      r.algorithm = std::string(f[1]);
      r.n_rollouts = parse_unsigned<std::size_t>(f[2]);
      r.seed = parse_unsigned<std::uint64_t>(f[3]);
      r.msve = detail::parse_double(f[4]);
      r.gate_rate = detail::parse_double(f[5]);
      r.wall_time_ms = detail::parse_double(f[6]);
      rows.push_back(std::move(r));
    } catch (const std::runtime_error&) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw;
    }
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_results_csv(in);
}

}  // namespace adaptd
