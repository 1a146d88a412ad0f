#include "philap/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace philap {

namespace {

std::string render(const MatrixXd& values, int first_index) {
  std::string out = "n";
  for (int r = 1; r <= values.rows(); ++r) out += ",u_" + std::to_string(r);
  out += "\n";
  char buf[64];
  for (int c = 0; c < values.cols(); ++c) {
    out += std::to_string(first_index + c);
    for (int r = 0; r < values.rows(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

MatrixXd parse(const std::string& text, int expected_first) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,u_1", 0) != 0)
    throw std::invalid_argument("csv: missing header row");
  std::vector<std::vector<double>> rows;
  int index = expected_first;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str())
        throw std::invalid_argument("csv: bad number '" + cell + "'");
      if (first) {
        if (static_cast<int>(v) != index)
          throw std::invalid_argument("csv: unexpected row index");
        first = false;
      } else {
        row.push_back(v);
      }
    }
    if (row.empty()) throw std::invalid_argument("csv: empty row");
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::invalid_argument("csv: ragged rows");
    rows.push_back(std::move(row));
    ++index;
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data rows");
  MatrixXd values(rows.front().size(), rows.size());
  for (size_t c = 0; c < rows.size(); ++c)
    for (size_t r = 0; r < rows[c].size(); ++r) values(r, c) = rows[c][r];
  return values;
}

}  // namespace

std::string to_csv(const GridFunction& u) { return render(u.values, 0); }
std::string to_csv(const InteriorFunction& h) { return render(h.values, 1); }

GridFunction grid_from_csv(const std::string& text) {
  return GridFunction(parse(text, 0));
}

InteriorFunction interior_from_csv(const std::string& text) {
  return InteriorFunction(parse(text, 1));
}

}  // namespace philap
