#pragma once

#include <iosfwd>
#include <string>

#include "selfpen/dataset.hpp"

namespace selfpen {

/// Fixed 17 significant digits, as used for dataset export.
std::string format_double(double v);
/// Shortest text that parses back to the same double.
std::string format_shortest(double v);

/// CSV with header `x1,...,xp,y`, one sample per row.
void write_csv(const Dataset& d, std::ostream& out);
void write_csv(const Dataset& d, const std::string& path);

/// Inverse of write_csv. Throws kParse on a malformed header, a ragged row or
/// a non-numeric field and kIo when the file cannot be opened.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

}  // namespace selfpen
