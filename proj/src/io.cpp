#include "ppmc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ppmc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& s, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (std::isnan(v)) throw std::runtime_error("NaN");
    return v;
  } catch (...) {
    throw std::runtime_error("bad or missing value in column " + col + ": '" + s + "'");
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PanelData ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "person_id" || header[1] != "time" ||
      header[2] != "y1" || header[3] != "y2")
    throw std::runtime_error("data header must start with person_id,time,y1,y2");

  std::vector<int> x1_cols, x2_cols, xb_cols;
  std::vector<std::string> x1_names, x2_names, xb_names;
  for (std::size_t c = 4; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.rfind("x1_", 0) == 0) {
      x1_cols.push_back(static_cast<int>(c));
      x1_names.push_back(h.substr(3));
    } else if (h.rfind("x2_", 0) == 0) {
      x2_cols.push_back(static_cast<int>(c));
      x2_names.push_back(h.substr(3));
    } else if (h.rfind("xb_", 0) == 0) {
      xb_cols.push_back(static_cast<int>(c));
      xb_names.push_back(h.substr(3));
    } else {
      throw std::runtime_error("unknown column prefix in data header: " + h);
    }
  }

  struct Row {
    long person;
    long time;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    Row row;
    row.person = static_cast<long>(parse_cell(fields[0], "person_id"));
    row.time = static_cast<long>(parse_cell(fields[1], "time"));
    row.values.resize(fields.size());
    for (std::size_t c = 2; c < fields.size(); ++c)
      row.values[c] = parse_cell(fields[c], header[c]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("data file has no rows: " + path);

  // balanced-panel validation: all persons share the same set of times
  std::map<long, std::set<long>> times_by_person;
  std::set<long> all_times;
  for (const Row& r : rows) {
    if (!times_by_person[r.person].insert(r.time).second)
      throw std::runtime_error("duplicate (person " + std::to_string(r.person) + ", time " +
                               std::to_string(r.time) + ")");
    all_times.insert(r.time);
  }
  std::string offenders;
  for (const auto& [person, times] : times_by_person) {
    if (times != all_times) {
      if (!offenders.empty()) offenders += ", ";
      offenders += std::to_string(person);
    }
  }
  if (!offenders.empty())
    throw std::runtime_error("unbalanced panel: persons " + offenders +
                             " are missing some periods");

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.person != b.person ? a.person < b.person : a.time < b.time;
  });

  PanelData data;
  data.P = static_cast<int>(times_by_person.size());
  data.T = static_cast<int>(all_times.size());
  const std::size_t n = rows.size();
  data.y1.resize(n);
  data.y2.resize(n);
  data.X1.resize(n, static_cast<Eigen::Index>(x1_cols.size()));
  data.X2.resize(n, static_cast<Eigen::Index>(x2_cols.size()));
  Eigen::MatrixXd xb(n, static_cast<Eigen::Index>(xb_cols.size()));
  for (std::size_t r = 0; r < n; ++r) {
    const Row& row = rows[r];
    data.y1[r] = row.values[2];
    if (data.y1[r] != 0.0 && data.y1[r] != 1.0)
      throw std::runtime_error("y1 must be binary; got " + fmt17(data.y1[r]) + " for person " +
                               std::to_string(row.person));
    data.y2[r] = row.values[3];
    for (std::size_t j = 0; j < x1_cols.size(); ++j)
      data.X1(r, static_cast<Eigen::Index>(j)) = row.values[x1_cols[j]];
    for (std::size_t j = 0; j < x2_cols.size(); ++j)
      data.X2(r, static_cast<Eigen::Index>(j)) = row.values[x2_cols[j]];
    for (std::size_t j = 0; j < xb_cols.size(); ++j)
      xb(r, static_cast<Eigen::Index>(j)) = row.values[xb_cols[j]];
  }
  data.x1_names = x1_names;
  data.x2_names = x2_names;
  data.xb_names = xb_names;
  if (!xb_cols.empty()) {
    std::vector<int> all_cols(xb_cols.size());
    for (std::size_t j = 0; j < xb_cols.size(); ++j) all_cols[j] = static_cast<int>(j);
    const Eigen::MatrixXd avg = mundlak_averages(xb, data.P, data.T, all_cols);
    data.xbar1 = avg;
    data.xbar2 = avg;
  }
  data.finalize();
  return data;
}

void write_panel_csv(const PanelData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write data file: " + path);
  out << "person_id,time,y1,y2";
  for (const auto& nm : data.x1_names) out << ",x1_" << nm;
  for (const auto& nm : data.x2_names) out << ",x2_" << nm;
  for (const auto& nm : data.xb_names) out << ",xb_" << nm;
  out << "\n";
  // xb columns are only kept as person-level averages after ingestion, so
  // write the averages back (they round-trip to the same averages)
  for (int i = 0; i < data.P; ++i) {
    for (int t = 0; t < data.T; ++t) {
      const auto r = data.cell(i, t);
      out << (i + 1) << "," << (t + 1) << "," << fmt17(data.y1[r]) << "," << fmt17(data.y2[r]);
      for (Eigen::Index c = 0; c < data.X1.cols(); ++c) out << "," << fmt17(data.X1(r, c));
      for (Eigen::Index c = 0; c < data.X2.cols(); ++c) out << "," << fmt17(data.X2(r, c));
      for (Eigen::Index c = 0; c < data.xbar1.cols(); ++c) out << "," << fmt17(data.xbar1(i, c));
      out << "\n";
    }
  }
}

void write_draws_csv(const ChainOutput& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write draws file: " + path);
  for (std::size_t j = 0; j < chain.param_names.size(); ++j)
    out << (j ? "," : "") << chain.param_names[j];
  out << "\n";
  for (Eigen::Index r = 0; r < chain.draws.rows(); ++r) {
    for (Eigen::Index c = 0; c < chain.draws.cols(); ++c)
      out << (c ? "," : "") << fmt17(chain.draws(r, c));
    out << "\n";
  }
}

std::string file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace ppmc
