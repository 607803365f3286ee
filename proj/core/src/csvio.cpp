#include "omav/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace omav {

namespace {

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string sim_log_csv(const SimLog& log) {
  std::string out =
      "t,x,y,phi,th1,th2,xd,yd,phid,th1d,th2d,z11,z12,z13,z14,"
      "u_f1,u_lift,u_moment,e_pos,e_phi,feasible\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    append_num(out, log.t[i]);
    for (double v : log.state[i]) {
      out += ',';
      append_num(out, v);
    }
    for (double v : log.input[i]) {
      out += ',';
      append_num(out, v);
    }
    out += ',';
    append_num(out, log.e_pos[i]);
    out += ',';
    append_num(out, log.e_phi[i]);
    out += ',';
    out += log.input_feasible[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_sim_log_csv(const std::string& path, const SimLog& log) {
  write_text_file(path, sim_log_csv(log));
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_num(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  write_text_file(path, table_csv(header, rows));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace omav
