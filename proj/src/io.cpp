#include "sparse_recovery/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sparse_recovery {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::size_t parse_index(const std::string& text, std::size_t line) {
  const auto t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("line " + std::to_string(line) + ": expected a nonnegative index, got '" +
                                t + "'");
  }
  return static_cast<std::size_t>(std::stoull(t));
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_number(const std::string& text) {
  const auto t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty numeric field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  return v;
}

void write_signal_csv(std::ostream& out, const Signal& x) {
  out << "index,value\n";
  for (std::size_t n = 0; n < x.size(); ++n) out << n << ',' << format_number(x[n]) << '\n';
}

void write_signal_csv(const std::filesystem::path& path, const Signal& x) {
  auto out = open_output(path);
  write_signal_csv(out, x);
  finish(out, path);
}

Signal read_signal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "index,value") {
    throw std::invalid_argument("signal CSV must start with header 'index,value'");
  }
  std::vector<double> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'index,value'");
    }
    const auto index = parse_index(line.substr(0, comma), line_no);
    if (index != samples.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected index " +
                                  std::to_string(samples.size()) + ", got " + std::to_string(index));
    }
    samples.push_back(parse_number(line.substr(comma + 1)));
  }
  return Signal(std::move(samples));
}

Signal read_signal_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_signal_csv(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_mask_csv(std::ostream& out, const AvailabilityMask& mask) {
  out << "missing\n";
  for (auto n : mask.missing()) out << n << '\n';
}

void write_mask_csv(const std::filesystem::path& path, const AvailabilityMask& mask) {
  auto out = open_output(path);
  write_mask_csv(out, mask);
  finish(out, path);
}

AvailabilityMask read_mask_csv(std::istream& in, std::size_t length) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "missing") {
    throw std::invalid_argument("mask CSV must start with header 'missing'");
  }
  std::vector<std::size_t> missing;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    missing.push_back(parse_index(line, line_no));
  }
  return AvailabilityMask(length, std::move(missing));
}

AvailabilityMask read_mask_csv(const std::filesystem::path& path, std::size_t length) {
  auto in = open_input(path);
  try {
    return read_mask_csv(in, length);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_spectrum_magnitude_csv(const std::filesystem::path& path, const Spectrum& X) {
  auto out = open_output(path);
  out << "k,magnitude\n";
  for (std::size_t k = 0; k < X.size(); ++k) out << k << ',' << format_number(std::abs(X[k])) << '\n';
  finish(out, path);
}

}  // namespace sparse_recovery
