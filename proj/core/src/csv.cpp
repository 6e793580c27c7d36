#include "gapfair/csv.hpp"

#include "gapfair/errors.hpp"

namespace gapfair::csv {

std::vector<std::vector<std::string>> read_records(std::istream& in, const std::string& origin,
                                                   std::vector<std::size_t>* record_lines) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t lineno = 1, record_start = 1;
  char c;
  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(fields));
    fields.clear();
    if (record_lines) record_lines->push_back(record_start);
    record_start = lineno;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field.push_back(c);
      }
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else if (c == '\n') {
      ++lineno;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError(origin + ": unterminated quoted field");
  if (field_started || !fields.empty()) end_record();
  return records;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace gapfair::csv
