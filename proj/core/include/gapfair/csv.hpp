#pragma once

#include <istream>
#include <string>
#include <vector>

namespace gapfair::csv {

// RFC-4180 subset: quoted fields may contain commas, newlines and "" escapes.
// record_lines, when given, receives the 1-based starting line of each record.
std::vector<std::vector<std::string>> read_records(std::istream& in, const std::string& origin,
                                                   std::vector<std::size_t>* record_lines = nullptr);

// Quotes a field only when it needs quoting.
std::string escape(const std::string& field);

}  // namespace gapfair::csv
