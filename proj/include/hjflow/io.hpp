#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hjflow/asymptotics.hpp"
#include "hjflow/field.hpp"

namespace hjflow {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// series.csv: header kSeriesColumns, one row per record, %.17g.
void write_series_csv(const std::filesystem::path& path, const TimeSeries& series);
TimeSeries read_series_csv(const std::filesystem::path& path);

/// Snapshot text format:
///   kind nx ny h x0 y0
///   [masked only] ny-1 lines of nx-1 characters '0'/'1' (cell rows, y upward)
///   one value per active node, row-major, 17 significant digits
void write_snapshot(const std::filesystem::path& path, const Field& u);
Field read_snapshot(const std::filesystem::path& path);

/// verdicts.csv: name,pass,measured,threshold
void write_verdicts_csv(const std::filesystem::path& path, const std::vector<Verdict>& verdicts);
std::vector<Verdict> read_verdicts_csv(const std::filesystem::path& path);

}  // namespace hjflow
