#ifndef SPARSE_RECOVERY_IO_HPP
#define SPARSE_RECOVERY_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "sparse_recovery/signal_model.hpp"
#include "sparse_recovery/transform.hpp"

namespace sparse_recovery {

/// Shortest text that round-trips the double ("%.17g"); "inf", "-inf" and
/// "nan" for non-finite values.
std::string format_number(double value);

/// Parses a number written by format_number (or any strtod-compatible text).
double parse_number(const std::string& text);

// Signal CSV: header "index,value", one row per sample, indices 0..N-1 in order.
void write_signal_csv(std::ostream& out, const Signal& x);
void write_signal_csv(const std::filesystem::path& path, const Signal& x);
Signal read_signal_csv(std::istream& in);
Signal read_signal_csv(const std::filesystem::path& path);

// Mask CSV: header "missing", one missing index per row. The file does not
// carry N; the reader takes it from the signal it pairs with.
void write_mask_csv(std::ostream& out, const AvailabilityMask& mask);
void write_mask_csv(const std::filesystem::path& path, const AvailabilityMask& mask);
AvailabilityMask read_mask_csv(std::istream& in, std::size_t length);
AvailabilityMask read_mask_csv(const std::filesystem::path& path, std::size_t length);

/// Header "k,magnitude", |X(k)| per row.
void write_spectrum_magnitude_csv(const std::filesystem::path& path, const Spectrum& X);

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_IO_HPP
