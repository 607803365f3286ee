#pragma once

#include <string>
#include <vector>

#include "omav/simulate.hpp"

namespace omav {

// Columns: t, x, y, phi, th1, th2, xd, yd, phid, th1d, th2d, z11, z12,
// z13, z14, u_f1, u_lift, u_moment, e_pos, e_phi, feasible.
// Numbers are %.17g so reading the file back is lossless.
std::string sim_log_csv(const SimLog& log);
void write_sim_log_csv(const std::string& path, const SimLog& log);

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);
void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace omav
