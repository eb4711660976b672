#include "idid/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace idid {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  while (ptr != end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error("csv: row " + std::to_string(row) + ": cannot parse '" +
                             cell + "' in column " + col);
  }
  return value;
}

int parse_binary(const std::string& cell, std::size_t row, const std::string& col) {
  const double v = parse_double(cell, row, col);
  if (v != 0.0 && v != 1.0) {
    throw std::runtime_error("csv: row " + std::to_string(row) + ": column " + col +
                             " must be 0 or 1, got '" + cell + "'");
  }
  return static_cast<int>(v);
}

struct ParsedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

ParsedTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  ParsedTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path.string());
  table.header = split_line(strip_cr(line));
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    table.rows.push_back(split_line(line));
  }
  return table;
}

void check_row_width(const std::vector<std::string>& cells, std::size_t expected,
                     std::size_t row) {
  if (cells.size() != expected) {
    throw std::runtime_error("csv: row " + std::to_string(row) + ": expected " +
                             std::to_string(expected) + " cells, got " +
                             std::to_string(cells.size()));
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const ParsedTable table = read_table(path);
  const auto& h = table.header;
  if (h.size() < 4) {
    throw std::runtime_error("csv: header too short for cross-section schema in " +
                             path.string());
  }
  const std::size_t p = h.size() - 4;
  const std::vector<std::string> expected = {"a", "y", "t", "z"};
  for (std::size_t k = 0; k < 4; ++k) {
    if (h[p + k] != expected[k]) {
      throw std::runtime_error("csv: cross-section schema requires trailing columns "
                               "a,y,t,z; found '" + h[p + k] + "' where '" +
                               expected[k] + "' was expected");
    }
  }
  const std::size_t n = table.rows.size();
  if (n == 0) throw std::runtime_error("csv: no data rows (n >= 1 violated)");

  RowMatrixXd x(n, p);
  Eigen::VectorXi a(n), t(n), z(n);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cells = table.rows[i];
    check_row_width(cells, h.size(), i);
    for (std::size_t j = 0; j < p; ++j) x(i, j) = parse_double(cells[j], i, h[j]);
    a[static_cast<Eigen::Index>(i)] = parse_binary(cells[p], i, "a");
    y[static_cast<Eigen::Index>(i)] = parse_double(cells[p + 1], i, "y");
    t[static_cast<Eigen::Index>(i)] = parse_binary(cells[p + 2], i, "t");
    z[static_cast<Eigen::Index>(i)] = parse_binary(cells[p + 3], i, "z");
  }
  std::vector<std::string> names(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(p));
  const bool augmented = !names.empty() && names.front() == "intercept";
  return Dataset(std::move(x), std::move(a), std::move(y), std::move(t), std::move(z),
                 std::move(names), augmented);
}

PanelDataset read_panel_csv(const std::filesystem::path& path) {
  const ParsedTable table = read_table(path);
  const auto& h = table.header;
  if (h.size() < 5) {
    throw std::runtime_error("csv: header too short for panel schema in " + path.string());
  }
  const std::size_t p = h.size() - 5;
  const std::vector<std::string> expected = {"z", "a0", "y0", "a1", "y1"};
  for (std::size_t k = 0; k < 5; ++k) {
    if (h[p + k] != expected[k]) {
      throw std::runtime_error("csv: panel schema requires trailing columns "
                               "z,a0,y0,a1,y1; found '" + h[p + k] + "' where '" +
                               expected[k] + "' was expected");
    }
  }
  const std::size_t n = table.rows.size();
  if (n == 0) throw std::runtime_error("csv: no data rows (n >= 1 violated)");

  RowMatrixXd x(n, p);
  Eigen::VectorXi z(n), a0(n), a1(n);
  Eigen::VectorXd y0(n), y1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cells = table.rows[i];
    check_row_width(cells, h.size(), i);
    for (std::size_t j = 0; j < p; ++j) x(i, j) = parse_double(cells[j], i, h[j]);
    z[static_cast<Eigen::Index>(i)] = parse_binary(cells[p], i, "z");
    a0[static_cast<Eigen::Index>(i)] = parse_binary(cells[p + 1], i, "a0");
    y0[static_cast<Eigen::Index>(i)] = parse_double(cells[p + 2], i, "y0");
    a1[static_cast<Eigen::Index>(i)] = parse_binary(cells[p + 3], i, "a1");
    y1[static_cast<Eigen::Index>(i)] = parse_double(cells[p + 4], i, "y1");
  }
  std::vector<std::string> names(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(p));
  const bool augmented = !names.empty() && names.front() == "intercept";
  return PanelDataset(std::move(x), std::move(z), std::move(a0), std::move(y0),
                      std::move(a1), std::move(y1), std::move(names), augmented);
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream os;
  for (const auto& name : data.covariate_names()) os << name << ',';
  os << "a,y,t,z\n";
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) os << format_double(data.x()(i, j)) << ',';
    os << data.a()[i] << ',' << format_double(data.y()[i]) << ',' << data.t()[i] << ','
       << data.z()[i] << '\n';
  }
  return os.str();
}

std::string panel_to_csv(const PanelDataset& data) {
  std::ostringstream os;
  for (const auto& name : data.covariate_names()) os << name << ',';
  os << "z,a0,y0,a1,y1\n";
  const auto n = static_cast<Eigen::Index>(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) os << format_double(data.x()(i, j)) << ',';
    os << data.z()[i] << ',' << data.a0()[i] << ',' << format_double(data.y0()[i]) << ','
       << data.a1()[i] << ',' << format_double(data.y1()[i]) << '\n';
  }
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace idid
