#ifndef FF_IO_HPP
#define FF_IO_HPP

#include <filesystem>
#include <string>

#include "ff/field.hpp"

namespace ff::io {

/// Writes `<stem>.json` (layout header) and `<stem>.bin` (raw little-endian
/// f64 payload, point-major, components row-major). `kind` is an optional
/// free-form tag ("metric", "second_form", ...). Returns the header path.
std::filesystem::path write_field(const Field<double>& field, const std::filesystem::path& stem,
                                  const std::string& kind = "");

/// Reads a field from its JSON header (the payload path is resolved relative
/// to the header). Throws ValidationError on malformed or inconsistent files.
Field<double> read_field(const std::filesystem::path& header);

/// Tag stored in a header, empty if none.
std::string read_kind(const std::filesystem::path& header);

/// CSV export for d = 2 charts: columns x, y, c0, c1, ...
void write_csv(const Field<double>& field, const std::filesystem::path& path);

/// Shortest round-trip decimal for a double.
std::string format_double(double value);

}  // namespace ff::io

#endif  // FF_IO_HPP
