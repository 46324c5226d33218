#include "cyvortex/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "cyvortex/error.hpp"

namespace cyv {

std::string field_csv(const StripGrid& grid, const GridField& field) {
  require_shape(grid, field, "dumped field");
  std::string out = "t,theta,value\n";
  out.reserve(out.size() + field.size() * 64);
  char buf[96];
  for (std::size_t i = 0; i < grid.n_t(); ++i) {
    for (std::size_t j = 0; j < grid.n_theta(); ++j) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.t(i), grid.theta(j), field(i, j));
      out.append(buf, static_cast<std::size_t>(n));
    }
  }
  return out;
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    std::ostringstream msg;
    msg << "tabulated metric: bad number '" << s << "' on line " << line;
    throw Error(ErrorCode::invalid_argument, msg.str());
  }
  return v;
}

}  // namespace

TabulatedSamples parse_tabulated_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::invalid_argument, "tabulated metric: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,theta,lambda") throw Error(ErrorCode::invalid_argument, "tabulated metric: header must be t,theta,lambda");

  struct Row {
    double t, theta, lambda;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::array<std::string, 3> cols;
    std::size_t k = 0, start = 0;
    for (std::size_t p = 0; p <= line.size(); ++p) {
      if (p == line.size() || line[p] == ',') {
        if (k >= 3) throw Error(ErrorCode::invalid_argument, "tabulated metric: too many columns on line " + std::to_string(lineno));
        cols[k++] = line.substr(start, p - start);
        start = p + 1;
      }
    }
    if (k != 3) throw Error(ErrorCode::invalid_argument, "tabulated metric: expected 3 columns on line " + std::to_string(lineno));
    rows.push_back({parse_number(cols[0], lineno), parse_number(cols[1], lineno), parse_number(cols[2], lineno)});
  }
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "tabulated metric: no samples");

  std::vector<double> ts, qs;
  for (const auto& r : rows) {
    ts.push_back(r.t);
    qs.push_back(r.theta);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(ts);
  uniq(qs);
  TabulatedSamples tab;
  tab.n_t = ts.size();
  tab.n_theta = qs.size();
  if (tab.n_t < 2 || tab.n_theta < 1) throw Error(ErrorCode::invalid_argument, "tabulated metric: need at least 2 rows in t");
  if (rows.size() != tab.n_t * tab.n_theta) {
    throw Error(ErrorCode::invalid_argument, "tabulated metric: samples do not form a complete tensor grid");
  }
  tab.t_min = ts.front();
  tab.dt = (ts.back() - ts.front()) / static_cast<double>(tab.n_t - 1);
  for (std::size_t i = 0; i < tab.n_t; ++i) {
    if (std::abs(ts[i] - (tab.t_min + tab.dt * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(ts[i]))) {
      throw Error(ErrorCode::invalid_argument, "tabulated metric: t samples are not uniform");
    }
  }
  const double dq = 2.0 * std::acos(-1.0) / static_cast<double>(tab.n_theta);
  for (std::size_t j = 0; j < tab.n_theta; ++j) {
    if (std::abs(qs[j] - dq * static_cast<double>(j)) > 1e-9) {
      throw Error(ErrorCode::invalid_argument, "tabulated metric: theta samples must be 2 pi j / n_theta");
    }
  }
  tab.values.assign(tab.n_t * tab.n_theta, 0.0);
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::llround((r.t - tab.t_min) / tab.dt));
    const auto j = static_cast<std::size_t>(std::llround(r.theta / dq));
    tab.values[i * tab.n_theta + j] = r.lambda;
  }
  return tab;
}

TabulatedSamples read_tabulated_csv(const std::filesystem::path& path) { return parse_tabulated_csv(read_text(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cyv
