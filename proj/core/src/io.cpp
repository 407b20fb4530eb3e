#include "polyfsi/io.hpp"

#include <cinttypes>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace polyfsi {

CsvWriter::CsvWriter(const std::string& path, const std::string& header) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError("cannot open " + path);
  std::fprintf(f_, "%s\n", header.c_str());
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::write_row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, i + 1 < values.size() ? "%.17g," : "%.17g\n", values[i]);
}

void CsvWriter::flush() { std::fflush(f_); }

std::string CsvWriter::diag_header() {
  return "time,mass,min_f,max_f,supx_l2m,div_residual,trace_residual,"
         "beam_energy,flow_energy,drag_production,sup_eta,contraction_rho";
}

std::vector<double> CsvWriter::diag_row(const StepDiag& d) {
  return {d.time,          d.mass,        d.min_f,          d.max_f,
          d.supx_l2m,      d.div_residual, d.trace_residual, d.beam_energy,
          d.flow_energy,   d.drag_production, d.sup_eta,     d.contraction_rho};
}

void dump_field(const std::string& dir, const std::string& field, int step, double time,
                const std::vector<double>& data, const std::vector<int>& shape) {
  char idx[32];
  std::snprintf(idx, sizeof idx, "%06d", step);
  const std::string base = dir + "/" + field + "_" + idx;
  {
    std::ofstream out(base + ".f64", std::ios::binary);
    if (!out) throw IoError("cannot open " + base + ".f64");
    // doubles written verbatim; the build targets little-endian hosts
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  nlohmann::json side;
  side["field"] = field;
  side["step"] = step;
  side["time"] = time;
  side["shape"] = shape;
  side["dtype"] = "float64_le";
  side["order"] = "x_major";
  std::ofstream out(base + ".json");
  if (!out) throw IoError("cannot open " + base + ".json");
  out << side.dump(2) << "\n";
}

void write_summary_json(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << text << "\n";
}

namespace {

constexpr uint32_t kMagic = 0x50465349;  // "PFSI"
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void get(std::ifstream& i, T& v) {
  i.read(reinterpret_cast<char*>(&v), sizeof v);
}

void put_vec(std::ofstream& o, const std::vector<double>& v) {
  const uint64_t n = v.size();
  put(o, n);
  o.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
}

void get_vec(std::ifstream& i, std::vector<double>& v) {
  uint64_t n = 0;
  get(i, n);
  v.resize(n);
  i.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::string& path, const CoupledState& s, uint64_t config_hash) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw IoError("cannot open " + path);
  put(o, kMagic);
  put(o, kVersion);
  put(o, config_hash);
  put(o, s.t0);
  put(o, s.window);
  const int64_t step = s.step_index;
  put(o, step);
  put(o, s.structure.time);
  put_vec(o, s.structure.eta);
  put_vec(o, s.structure.eta_dot);
  put(o, s.flow.time);
  std::vector<double> ux, uy, rx, ry;
  for (const Vec2& v : s.flow.u.v) {
    ux.push_back(v.x);
    uy.push_back(v.y);
  }
  for (const Vec2& v : s.flow.u_rim) {
    rx.push_back(v.x);
    ry.push_back(v.y);
  }
  put_vec(o, ux);
  put_vec(o, uy);
  put_vec(o, rx);
  put_vec(o, ry);
  put_vec(o, s.flow.p.v);
  const int64_t nx = s.dist.nx, nq = s.dist.nq;
  put(o, nx);
  put(o, nq);
  put(o, s.dist.time);
  put_vec(o, s.dist.f);
  put_vec(o, s.dist.f_dot);
  put_vec(o, s.dist.geom_w);
  put_vec(o, s.y_distances);
  if (!o) throw IoError("short write to " + path);
}

CoupledState load_checkpoint(const std::string& path, uint64_t expected_config_hash) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw IoError("cannot open " + path);
  uint32_t magic = 0, version = 0;
  uint64_t hash = 0;
  get(i, magic);
  get(i, version);
  get(i, hash);
  if (magic != kMagic) throw IoError("not a checkpoint file: " + path);
  if (version != kVersion) throw IoError("unsupported checkpoint version");
  if (hash != expected_config_hash)
    throw ConfigError("checkpoint belongs to a different configuration");
  CoupledState s;
  get(i, s.t0);
  get(i, s.window);
  int64_t step = 0;
  get(i, step);
  s.step_index = static_cast<int>(step);
  get(i, s.structure.time);
  get_vec(i, s.structure.eta);
  get_vec(i, s.structure.eta_dot);
  get(i, s.flow.time);
  std::vector<double> ux, uy, rx, ry;
  get_vec(i, ux);
  get_vec(i, uy);
  get_vec(i, rx);
  get_vec(i, ry);
  get_vec(i, s.flow.p.v);
  s.flow.u.v.resize(ux.size());
  for (size_t k = 0; k < ux.size(); ++k) s.flow.u.v[k] = Vec2{ux[k], uy[k]};
  s.flow.u_rim.resize(rx.size());
  for (size_t k = 0; k < rx.size(); ++k) s.flow.u_rim[k] = Vec2{rx[k], ry[k]};
  int64_t nx = 0, nq = 0;
  get(i, nx);
  get(i, nq);
  s.dist.nx = static_cast<int>(nx);
  s.dist.nq = static_cast<int>(nq);
  get(i, s.dist.time);
  get_vec(i, s.dist.f);
  get_vec(i, s.dist.f_dot);
  get_vec(i, s.dist.geom_w);
  get_vec(i, s.y_distances);
  if (!i) throw IoError("short read from " + path);
  return s;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace polyfsi
