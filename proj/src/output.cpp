#include "fingering/output.hpp"

#include "fingering/error.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fingering {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(context + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

void write_text(const std::string& text, const std::string& path) {
    const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw Error("cannot open '" + path + "' for writing");
        const int n = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        const int rc = gzclose(f);
        if (n != static_cast<int>(text.size()) || rc != Z_OK) throw Error("write failed for '" + path + "'");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out) throw Error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");  // transparently reads uncompressed files too
    if (!f) throw Error("cannot open '" + path + "' for reading");
    std::string text;
    std::array<char, 1 << 16> buf;
    int n;
    while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0) text.append(buf.data(), n);
    gzclose(f);
    if (n < 0) throw Error("read failed for '" + path + "'");
    return text;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

std::string format_timeseries(const TimeSeries& s) {
    std::string out = kTimeSeriesHeader;
    out += '\n';
    for (std::size_t n = 0; n < s.size(); ++n) {
        out += format_double(s.times[n]) + ',' + format_double(s.energy[n]) + ',' + format_double(s.mean[n]) + ',' +
               format_double(s.variance[n]) + ',' + (s.mixing[n] ? format_double(*s.mixing[n]) : std::string()) +
               ',' + format_double(s.l1[n]) + ',' + format_double(s.l2[n]) + ',' + format_double(s.linf[n]) + '\n';
    }
    return out;
}

void write_timeseries(const TimeSeries& series, const std::string& path) { write_text(format_timeseries(series), path); }

TimeSeries read_timeseries(const std::string& path) {
    const std::string text = read_text(path);
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front() != kTimeSeriesHeader) throw Error(path + ": missing time-series header");
    TimeSeries s;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const auto cols = split(lines[n], ',');
        const std::string ctx = path + ":" + std::to_string(n + 1);
        if (cols.size() != 8) throw Error(ctx + ": expected 8 columns");
        Sample row;
        row.t = parse_double(cols[0], ctx);
        row.energy = parse_double(cols[1], ctx);
        row.mean = parse_double(cols[2], ctx);
        row.variance = parse_double(cols[3], ctx);
        if (!cols[4].empty()) row.mixing = parse_double(cols[4], ctx);
        row.l1 = parse_double(cols[5], ctx);
        row.l2 = parse_double(cols[6], ctx);
        row.linf = parse_double(cols[7], ctx);
        s.push_back(row);
    }
    return s;
}

std::pair<std::vector<double>, std::vector<double>> read_column(const std::string& path, const std::string& column) {
    const TimeSeries s = read_timeseries(path);
    std::vector<double> values;
    if (column == "energy") values = s.energy;
    else if (column == "mean") values = s.mean;
    else if (column == "variance") values = s.variance;
    else if (column == "l1") values = s.l1;
    else if (column == "l2") values = s.l2;
    else if (column == "linf") values = s.linf;
    else if (column == "mixing") {
        for (const auto& m : s.mixing) {
            if (!m) throw Error(path + ": mixing column has empty entries");
            values.push_back(*m);
        }
    } else
        throw Error("unknown column '" + column + "'");
    return {s.times, values};
}

void write_snapshot(const CellField& field, double t, const std::string& path) {
    const auto& g = field.grid;
    std::string out = "# " + std::to_string(g.nx()) + ' ' + std::to_string(g.ny()) + ' ' + format_double(g.Lx()) + ' ' +
                      format_double(g.Ly()) + ' ' + format_double(t) + '\n';
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (i) out += ' ';
            out += format_double(field(i, j));
        }
        out += '\n';
    }
    write_text(out, path);
}

Snapshot read_snapshot(const std::string& path) {
    const std::string text = read_text(path);
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front().substr(0, 2) != "# ") throw Error(path + ": missing snapshot header");
    std::istringstream hs{std::string(lines.front().substr(2))};
    int nx = 0, ny = 0;
    std::string lx, ly, ts;
    if (!(hs >> nx >> ny >> lx >> ly >> ts)) throw Error(path + ": malformed snapshot header");
    StructuredGrid g(parse_double(lx, path), parse_double(ly, path), nx, ny);
    if (lines.size() != static_cast<std::size_t>(ny) + 1) throw Error(path + ": expected " + std::to_string(ny) + " rows");
    Snapshot snap{CellField(g), parse_double(ts, path)};
    for (int j = 0; j < ny; ++j) {
        const auto cols = split(lines[static_cast<std::size_t>(j) + 1], ' ');
        const std::string ctx = path + ":" + std::to_string(j + 2);
        if (cols.size() != static_cast<std::size_t>(nx)) throw Error(ctx + ": expected " + std::to_string(nx) + " values");
        for (int i = 0; i < nx; ++i) snap.field(i, j) = parse_double(cols[static_cast<std::size_t>(i)], ctx);
    }
    return snap;
}

}  // namespace fingering
