#include "dcal/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dcal/errors.hpp"

namespace dcal {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& tok, int row, const std::string& col) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  if (begin == end)
    throw data_error("csv: missing value at row " + std::to_string(row) + ", column " + col);
  double v;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw data_error("csv: non-numeric value '" + tok + "' at row " + std::to_string(row) +
                     ", column " + col);
  return v;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path, TreatmentKind kind) {
  std::ifstream f(path);
  if (!f) throw data_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw data_error("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "t")
    throw data_error("csv: header must be y,t,x1,... in '" + path + "'");
  for (std::size_t j = 2; j < header.size(); ++j) {
    const std::string want = "x" + std::to_string(j - 1);
    if (header[j] != want)
      throw data_error("csv: expected column '" + want + "', found '" + header[j] + "'");
  }
  const int p = static_cast<int>(header.size() - 2) + 1;  // + intercept

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> toks = split_line(line);
    if (toks.size() != header.size())
      throw data_error("csv: row " + std::to_string(lineno) + " has " +
                       std::to_string(toks.size()) + " fields, expected " +
                       std::to_string(header.size()));
    std::vector<double> vals(toks.size());
    for (std::size_t j = 0; j < toks.size(); ++j)
      vals[j] = parse_cell(toks[j], lineno, header[j]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw data_error("csv: no data rows in '" + path + "'");

  Dataset d;
  d.treatment_kind = kind;
  const int n = static_cast<int>(rows.size());
  d.X.resize(n, p);
  d.T.resize(n);
  d.Y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.Y[i] = rows[i][0];
    d.T[i] = rows[i][1];
    d.X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) d.X(i, j) = rows[i][j + 1];
  }
  d.validate();
  return d;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw data_error("csv: cannot open '" + path + "' for writing");
  f << "y,t";
  for (int j = 1; j < data.p(); ++j) f << ",x" << j;
  f << "\n";
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << buf;
  };
  for (int i = 0; i < data.n(); ++i) {
    emit(data.Y[i]);
    f << ',';
    emit(data.T[i]);
    for (int j = 1; j < data.p(); ++j) {
      f << ',';
      emit(data.X(i, j));
    }
    f << "\n";
  }
  if (!f.good()) throw data_error("csv: write failed for '" + path + "'");
}

}  // namespace dcal
