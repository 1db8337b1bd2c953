#include "hjflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hjflow {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return f;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream s(line);
  while (std::getline(s, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double number(const std::string& text, const std::filesystem::path& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    if (text == "nan" || text == "-nan") return NAN;
    throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + text + "'");
  }
}

}  // namespace

void write_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
  auto f = open_out(path);
  f << kSeriesColumns << '\n';
  for (const auto& r : series.records) {
    f << g17(r.t) << ',' << g17(r.M) << ',' << g17(r.m) << ',' << g17(r.Lut) << ',' << g17(r.grad_sup) << ','
      << g17(r.xnorm_dev) << ',' << g17(r.meanF) << ',' << g17(r.sup_h) << ',' << g17(r.dt) << '\n';
  }
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line != kSeriesColumns)
    throw FormatError(path.string() + ":1: unexpected header");
  TimeSeries ts;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 9) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
    Record r;
    double* dst[9] = {&r.t, &r.M, &r.m, &r.Lut, &r.grad_sup, &r.xnorm_dev, &r.meanF, &r.sup_h, &r.dt};
    for (int i = 0; i < 9; ++i) *dst[i] = number(cols[i], path, lineno);
    // Not stored; the midpoint is only a placeholder until a snapshot supplies it.
    r.mean = 0.5 * (r.M + r.m);
    ts.records.push_back(r);
  }
  return ts;
}

void write_snapshot(const std::filesystem::path& path, const Field& u) {
  auto f = open_out(path);
  const Grid& g = u.grid();
  f << to_string(g.kind()) << ' ' << g.nx() << ' ' << g.ny() << ' ' << g17(g.h()) << ' ' << g17(g.origin_x()) << ' '
    << g17(g.origin_y()) << '\n';
  if (g.kind() == GridKind::masked) {
    for (int j = 0; j < g.ny() - 1; ++j) {
      for (int i = 0; i < g.nx() - 1; ++i) f << (g.cell_active(i, j) ? '1' : '0');
      f << '\n';
    }
  }
  for (std::size_t k = 0; k < u.size(); ++k) f << g17(u[k]) << '\n';
}

Field read_snapshot(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw FormatError(path.string() + ":1: empty snapshot");
  std::istringstream head(line);
  std::string kind;
  int nx = 0, ny = 0;
  double h = 0, x0 = 0, y0 = 0;
  if (!(head >> kind >> nx >> ny >> h >> x0 >> y0)) throw FormatError(path.string() + ":1: bad header");
  GridPtr grid;
  int lineno = 1;
  const GridKind gk = grid_kind_from_string(kind);
  if (gk == GridKind::interval) {
    grid = Grid::interval((nx - 1) * h, nx);
  } else if (gk == GridKind::rectangle) {
    grid = Grid::rectangle((nx - 1) * h, (ny - 1) * h, nx, ny);
  } else {
    std::vector<std::uint8_t> cells;
    for (int j = 0; j < ny - 1; ++j) {
      ++lineno;
      if (!std::getline(f, line) || line.size() != static_cast<std::size_t>(nx - 1))
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad mask row");
      for (char c : line) {
        if (c != '0' && c != '1') throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad mask bit");
        cells.push_back(c == '1');
      }
    }
    grid = Grid::from_mask(nx, ny, h, x0, y0, std::move(cells));
  }
  std::vector<double> vals;
  vals.reserve(grid->size());
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    vals.push_back(number(line, path, lineno));
  }
  if (vals.size() != grid->size())
    throw FormatError(path.string() + ": expected " + std::to_string(grid->size()) + " values, found " +
                      std::to_string(vals.size()));
  return Field(grid, std::move(vals));
}

void write_verdicts_csv(const std::filesystem::path& path, const std::vector<Verdict>& verdicts) {
  auto f = open_out(path);
  f << "name,pass,measured,threshold\n";
  for (const auto& v : verdicts)
    f << v.name << ',' << (v.pass ? 1 : 0) << ',' << g17(v.measured) << ',' << g17(v.threshold) << '\n';
}

std::vector<Verdict> read_verdicts_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line != "name,pass,measured,threshold")
    throw FormatError(path.string() + ":1: unexpected header");
  std::vector<Verdict> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    out.push_back({cols[0], cols[1] == "1", number(cols[2], path, lineno), number(cols[3], path, lineno)});
  }
  return out;
}

}  // namespace hjflow
