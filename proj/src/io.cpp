#include "vpkit/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vpkit {

namespace {

constexpr char kMagic[] = "VPENS1\n";
constexpr std::size_t kMagicSize = 7;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  std::uint64_t y = 0;
  for (int i = 0; i < 8; ++i) y |= ((x >> (8 * i)) & 0xFF) << (8 * (7 - i));
  return y;
}

void put_u64(std::ostream& out, std::uint64_t x) {
  x = to_little(x);
  out.write(reinterpret_cast<const char*>(&x), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t x = 0;
  in.read(reinterpret_cast<char*>(&x), 8);
  return to_little(x);
}

void put_column(std::ostream& out, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

void get_column(std::istream& in, double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_u64(in));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << x;
  return s.str();
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string number_label(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << x;
  return s.str();
}

}  // namespace

void write_ensemble(const std::filesystem::path& path, const Ensemble& ensemble, const nlohmann::json& extra_header) {
  const int n = ensemble.dimension();
  nlohmann::json header = extra_header.is_object() ? extra_header : nlohmann::json::object();
  std::vector<std::string> columns;
  for (int d = 0; d < n; ++d) columns.push_back("x" + std::to_string(d));
  for (int d = 0; d < n; ++d) columns.push_back("v" + std::to_string(d));
  columns.push_back("w");
  header["format"] = "vpkit-ensemble";
  header["version"] = 1;
  header["n"] = n;
  header["count"] = ensemble.size();
  header["columns"] = columns;
  header["dtype"] = "float64-le";
  header["f_inf_bound"] = ensemble.f_inf_bound();
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_ensemble: cannot open " + path.string());
  out.write(kMagic, kMagicSize);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (int d = 0; d < n; ++d) put_column(out, ensemble.positions().col(d).data(), ensemble.size());
  for (int d = 0; d < n; ++d) put_column(out, ensemble.velocities().col(d).data(), ensemble.size());
  put_column(out, ensemble.weights().data(), ensemble.size());
  if (!out) throw FormatError("write_ensemble: write failed for " + path.string());
}

EnsembleFile read_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_ensemble: cannot open " + path.string());
  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (!in || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw FormatError("read_ensemble: " + path.string() + " is not an ensemble file");
  }
  const std::uint64_t length = get_u64(in);
  if (!in || length > (1u << 26)) throw FormatError("read_ensemble: corrupt header length");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw FormatError("read_ensemble: truncated header");
  EnsembleFile file;
  try {
    file.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("read_ensemble: header is not JSON: ") + e.what());
  }
  const int n = file.header.at("n").get<int>();
  const auto count = file.header.at("count").get<Eigen::Index>();
  if ((n != 2 && n != 3) || count < 0) throw FormatError("read_ensemble: bad dimension or count");
  if (file.header.value("dtype", std::string()) != "float64-le") throw FormatError("read_ensemble: unknown dtype");
  PointMatrix<double> x(count, n), v(count, n);
  Eigen::VectorXd w(count);
  for (int d = 0; d < n; ++d) get_column(in, x.col(d).data(), count);
  for (int d = 0; d < n; ++d) get_column(in, v.col(d).data(), count);
  get_column(in, w.data(), count);
  if (!in) throw FormatError("read_ensemble: truncated data columns");
  file.ensemble = Ensemble(n, std::move(x), std::move(v), std::move(w), file.header.at("f_inf_bound").get<double>());
  return file;
}

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const Provenance& provenance) {
  out << "# config_hash=" << provenance.config_hash << " claims=" << join(provenance.claims, ';') << '\n';
  out << join(header, ',') << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("write_table_csv: row width differs from header");
    std::vector<std::string> cells;
    for (const double x : row) cells.push_back(format_number(x));
    out << join(cells, ',') << '\n';
  }
}

void write_series_csv(std::ostream& out, const DiagnosticsSeries& series, const Provenance& provenance) {
  std::vector<std::string> header{"time"};
  for (const double k : series.k_set) header.push_back("M_" + number_label(k));
  for (const double p : series.p_grid) header.push_back("rho_L" + number_label(p));
  for (const char* name : {"uniqueness", "uniqueness_p", "rho_inf", "field_sup", "running_field_sup", "energy"}) {
    header.push_back(name);
  }
  for (int d = 0; d < series.n; ++d) header.push_back("momentum_" + std::to_string(d));
  header.push_back("total_mass");
  header.push_back("mass_outside");

  std::vector<std::vector<double>> rows;
  for (const auto& r : series.records) {
    std::vector<double> row{r.time};
    row.insert(row.end(), r.moments.begin(), r.moments.end());
    row.insert(row.end(), r.lp_norms.begin(), r.lp_norms.end());
    for (const double x : {r.uniqueness, r.uniqueness_p, r.rho_inf, r.field_sup, r.running_field_sup, r.energy}) {
      row.push_back(x);
    }
    for (int d = 0; d < series.n; ++d) row.push_back(r.momentum[d]);
    row.push_back(r.total_mass);
    row.push_back(r.mass_outside);
    rows.push_back(std::move(row));
  }
  write_table_csv(out, header, rows, provenance);
}

namespace {

nlohmann::json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

nlohmann::json series_to_json(const DiagnosticsSeries& series, const Provenance& provenance) {
  nlohmann::json j;
  j["config_hash"] = provenance.config_hash;
  j["claims"] = provenance.claims;
  j["n"] = series.n;
  j["k_set"] = series.k_set;
  j["p_grid"] = series.p_grid;
  j["p_grid_note"] = "sup over p >= 1 is approximated from below by the max over p_grid";
  j["grid"] = {{"origin", std::vector<double>(series.grid.origin.data(), series.grid.origin.data() + series.grid.n)},
               {"h", series.grid.h},
               {"cells_per_axis", series.grid.cells_per_axis}};
  j["kernel"] = {{"gamma", series.kernel.gamma}, {"softening", series.kernel.softening}};
  j["dt"] = series.dt;
  j["seed"] = series.seed;
  j["failed"] = series.failed;
  if (series.failed) j["failure"] = series.failure;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : series.records) {
    nlohmann::json rec;
    rec["time"] = r.time;
    rec["moments"] = nlohmann::json::array();
    for (const double m : r.moments) rec["moments"].push_back(finite_or_string(m));
    rec["lp_norms"] = nlohmann::json::array();
    for (const double m : r.lp_norms) rec["lp_norms"].push_back(finite_or_string(m));
    rec["uniqueness"] = finite_or_string(r.uniqueness);
    rec["uniqueness_p"] = r.uniqueness_p;
    rec["rho_inf"] = finite_or_string(r.rho_inf);
    rec["field_sup"] = finite_or_string(r.field_sup);
    rec["running_field_sup"] = finite_or_string(r.running_field_sup);
    rec["energy"] = finite_or_string(r.energy);
    rec["momentum"] = std::vector<double>(r.momentum.data(), r.momentum.data() + r.momentum.size());
    rec["total_mass"] = r.total_mass;
    rec["mass_outside"] = r.mass_outside;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  return j;
}

nlohmann::json reports_to_json(const std::vector<VerificationReport>& reports, const Provenance& provenance) {
  nlohmann::json j;
  j["config_hash"] = provenance.config_hash;
  j["claims"] = provenance.claims;
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reports) j["reports"].push_back(r.to_json());
  return j;
}

std::string plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Plot every CSV written next to this script. Usage: python3 plot.py [outdir]"""
import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
target = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else here


def load(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    cols = {h: [] for h in header}
    for r in body:
        for h, x in zip(header, r):
            try:
                cols[h].append(float(x))
            except ValueError:
                cols[h].append(float("nan"))
    return header, cols


for path in sorted(here.glob("*.csv")):
    header, cols = load(path)
    x = header[0]
    ys = [h for h in header[1:] if any(v == v for v in cols[h])]
    if not ys:
        continue
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for h in ys[:12]:
        ax.plot(cols[x], cols[h], label=h)
    ax.set_xlabel(x)
    ax.set_title(path.stem)
    positive = all(v > 0 for h in ys[:12] for v in cols[h] if v == v)
    if positive and x in ("d", "p"):
        ax.set_xscale("log")
    if positive:
        ax.set_yscale("log")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(target / (path.stem + ".png"), dpi=120)
    plt.close(fig)
    print("wrote", target / (path.stem + ".png"))
)PY";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace vpkit
