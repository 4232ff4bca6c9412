#pragma once

#include <string>
#include <vector>

#include "dsdr/experiment.hpp"
#include "dsdr/psvm.hpp"

namespace dsdr {

/// Header `y,x1,...,xp`, one observation per line. Throws Io for unreadable
/// files and InvalidArgument for malformed content.
Dataset read_dataset(const std::string& path);
void write_dataset(const std::string& path, const Dataset& data);

/// Headerless numeric CSV, 17 significant digits.
void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);

/// One value per line, 17 significant digits.
void write_vector(const std::string& path, const Vector& v);

/// Fixed header model,engine,variant,n,p,k,B,replicates,mean_distance,
/// sd_distance,mean_runtime_s (plus mean_dcor when any row has it).
/// Runtime is written as NA unless include_timing is set, so that the same
/// config and seed give byte-identical output.
std::string format_report(const std::vector<ReportRow>& rows, bool include_timing);
void write_text(const std::string& path, const std::string& text);

}  // namespace dsdr
