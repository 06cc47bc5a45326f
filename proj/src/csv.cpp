#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msa/core.hpp"

namespace msa {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("csv: bad numeric field '" + text + "' on line " +
                                std::to_string(line_no));
  }
  return value;
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3) {
    throw std::invalid_argument("csv: header must be x0,...,y,domain: " + path);
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i] != "x" + std::to_string(i)) {
      throw std::invalid_argument("csv: expected column x" + std::to_string(i) +
                                  ", found '" + header[i] + "'");
    }
  }
  if (header[d] != "y" || header[d + 1] != "domain") {
    throw std::invalid_argument("csv: last two columns must be y,domain");
  }

  std::vector<Sample> samples;
  int max_domain = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("csv: ragged row on line " + std::to_string(line_no));
    }
    Sample s;
    s.x.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.x[i] = parse_double(fields[i], line_no);
    if (!fields[d].empty()) s.y = parse_double(fields[d], line_no);
    if (!fields[d + 1].empty()) {
      const double domain_value = parse_double(fields[d + 1], line_no);
      const int domain = static_cast<int>(domain_value);
      if (domain < 0 || domain != domain_value) {
        throw std::invalid_argument("csv: bad domain index on line " + std::to_string(line_no));
      }
      s.domain = domain;
      max_domain = std::max(max_domain, domain);
    }
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), max_domain + 1);
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  for (int i = 0; i < data.dim(); ++i) out << "x" << i << ",";
  out << "y,domain\n";
  char buffer[64];
  for (const Sample& s : data.samples()) {
    for (double v : s.x) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", v);
      out << buffer << ",";
    }
    if (s.y) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", *s.y);
      out << buffer;
    }
    out << ",";
    if (s.domain) out << *s.domain;
    out << "\n";
  }
  if (!out) throw IoError("failed writing dataset file: " + path);
}

}  // namespace msa
