#pragma once

#include "fingering/diagnostics.hpp"
#include "fingering/grid.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fingering {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

inline constexpr const char* kTimeSeriesHeader = "t,energy,mean,variance,mixing,l1,l2,linf";

/// CSV text for a series; an absent mixing value is written as an empty field.
std::string format_timeseries(const TimeSeries& series);

/// Writes format_timeseries(series) to `path`; throws Error naming the path on failure.
void write_timeseries(const TimeSeries& series, const std::string& path);

TimeSeries read_timeseries(const std::string& path);

/// (t, column) pairs from a time-series CSV.
std::pair<std::vector<double>, std::vector<double>> read_column(const std::string& path, const std::string& column);

/// Plain-text snapshot: `# nx ny Lx Ly t`, then ny rows of nx values, row j = y-index j.
/// A path ending in ".gz" is gzip-compressed.
void write_snapshot(const CellField& field, double t, const std::string& path);

struct Snapshot {
    CellField field;
    double t;
};

Snapshot read_snapshot(const std::string& path);

}  // namespace fingering
