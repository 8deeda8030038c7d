#include "pertprox/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace pertprox {

void write_trajectory_csv(std::ostream& out, const std::vector<IterateRecord>& iterates,
                          int dimension) {
  std::string line = "t";
  for (int i = 1; i <= dimension; ++i) line += fmt::format(",x_{}", i);
  line += ",f_lambda,grad_map_norm,perturbed\n";
  out << line;
  for (const IterateRecord& rec : iterates) {
    line = fmt::format("{}", rec.t);
    for (int i = 0; i < dimension; ++i) line += fmt::format(",{:.17g}", rec.x[i]);
    line += fmt::format(",{:.17g},{:.17g},{}\n", rec.envelope_value, rec.grad_map_norm,
                        rec.perturbed ? 1 : 0);
    out << line;
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<IterateRecord>& iterates, int dimension) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trajectory_csv(out, iterates, dimension);
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_real(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(fmt::format("trajectory CSV line {}: bad number '{}'", line_no, s));
  }
}

}  // namespace

std::vector<IterateRecord> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("trajectory CSV is empty");
  const std::vector<std::string> header = split_fields(line);
  const int dimension = static_cast<int>(header.size()) - 4;
  if (dimension < 1 || header.front() != "t" || header[header.size() - 3] != "f_lambda" ||
      header[header.size() - 2] != "grad_map_norm" || header.back() != "perturbed") {
    throw Error("trajectory CSV header does not match t,x_1..x_d,f_lambda,grad_map_norm,perturbed");
  }

  std::vector<IterateRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(fmt::format("trajectory CSV line {}: expected {} fields, got {}", line_no,
                              header.size(), fields.size()));
    }
    IterateRecord rec;
    const auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), rec.t);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw Error(fmt::format("trajectory CSV line {}: bad iteration index", line_no));
    }
    rec.x.resize(dimension);
    for (int i = 0; i < dimension; ++i) rec.x[i] = parse_real(fields[1 + i], line_no);
    rec.envelope_value = parse_real(fields[1 + dimension], line_no);
    rec.grad_map_norm = parse_real(fields[2 + dimension], line_no);
    const std::string& flag = fields.back();
    if (flag != "0" && flag != "1") {
      throw Error(fmt::format("trajectory CSV line {}: perturbed must be 0 or 1", line_no));
    }
    rec.perturbed = flag == "1";
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<IterateRecord> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_trajectory_csv(in);
}

}  // namespace pertprox
