#include <cstring>
#include <fstream>
#include <sstream>

#include "vnslab/io.hpp"

namespace vnslab::io {

namespace {

constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::uint32_t kFieldVersion = 1;
constexpr std::uint32_t kGridVersion = 1;
constexpr std::uint32_t kEnsembleVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    path_ = path;
  }
  void magic(const char m[4]) { out_.write(m, 4); }
  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void doubles(const double* p, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(p), sizeof(double) * n);
  }
  void str(const std::string& s) {
    std::uint64_t n = s.size();
    pod(n);
    out_.write(s.data(), static_cast<std::streamsize>(n));
  }
  void done() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open for reading: " + path);
    path_ = path;
  }
  void magic(const char m[4]) {
    char buf[4];
    in_.read(buf, 4);
    if (!in_ || std::memcmp(buf, m, 4) != 0)
      throw IoError("bad file magic in " + path_);
  }
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw IoError("truncated file: " + path_);
    return v;
  }
  void doubles(double* p, std::size_t n) {
    in_.read(reinterpret_cast<char*>(p), sizeof(double) * n);
    if (!in_) throw IoError("truncated file: " + path_);
  }
  std::string str() {
    auto n = pod<std::uint64_t>();
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated file: " + path_);
    return s;
  }
  void check_version(std::uint32_t expected) {
    auto v = pod<std::uint32_t>();
    if (v != expected)
      throw IoError("unsupported format version " + std::to_string(v) + " in " + path_ +
                    " (expected " + std::to_string(expected) + ")");
    auto tag = pod<std::uint32_t>();
    if (tag != kEndianTag) throw IoError("endianness mismatch in " + path_);
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_field(const FourierField& f, const std::string& path) {
  Writer w(path);
  w.magic("VNSF");
  w.pod(kFieldVersion);
  w.pod(kEndianTag);
  w.pod<std::uint32_t>(f.dim());
  w.pod<std::uint32_t>(f.n());
  w.pod<std::uint8_t>(f.div_free() ? 1 : 0);
  w.doubles(reinterpret_cast<const double*>(f.raw().data()), f.raw().size() * 2);
  w.done();
}

FourierField load_field(const std::string& path) {
  Reader r(path);
  r.magic("VNSF");
  r.check_version(kFieldVersion);
  auto d = r.pod<std::uint32_t>();
  auto n = r.pod<std::uint32_t>();
  auto df = r.pod<std::uint8_t>();
  FourierField f(spectral::GridSpec(static_cast<int>(d), static_cast<int>(n)), df != 0);
  r.doubles(reinterpret_cast<double*>(f.raw().data()), f.raw().size() * 2);
  return f;
}

void save_grid(const GridField& g, const std::string& path) {
  Writer w(path);
  w.magic("VNSG");
  w.pod(kGridVersion);
  w.pod(kEndianTag);
  w.pod<std::uint32_t>(g.spec.d);
  w.pod<std::uint32_t>(g.spec.n);
  w.pod<std::uint32_t>(g.comps);
  w.doubles(g.values.data(), g.values.size());
  w.done();
}

GridField load_grid(const std::string& path) {
  Reader r(path);
  r.magic("VNSG");
  r.check_version(kGridVersion);
  auto d = r.pod<std::uint32_t>();
  auto n = r.pod<std::uint32_t>();
  auto comps = r.pod<std::uint32_t>();
  GridField g(spectral::GridSpec(static_cast<int>(d), static_cast<int>(n)),
              static_cast<int>(comps));
  r.doubles(g.values.data(), g.values.size());
  return g;
}

void save_ensemble(const ParticleEnsemble& p, const std::string& path) {
  Writer w(path);
  w.magic("VNSP");
  w.pod(kEnsembleVersion);
  w.pod(kEndianTag);
  w.pod<std::uint32_t>(p.d);
  w.pod(p.q);
  w.pod(p.v_max);
  w.pod(p.seed);
  w.pod<std::uint64_t>(p.size());
  w.doubles(p.x.data(), p.x.size());
  w.doubles(p.v.data(), p.v.size());
  w.doubles(p.w.data(), p.w.size());
  w.done();
}

ParticleEnsemble load_ensemble(const std::string& path) {
  Reader r(path);
  r.magic("VNSP");
  r.check_version(kEnsembleVersion);
  ParticleEnsemble p;
  p.d = static_cast<int>(r.pod<std::uint32_t>());
  p.q = r.pod<double>();
  p.v_max = r.pod<double>();
  p.seed = r.pod<std::uint64_t>();
  auto n = r.pod<std::uint64_t>();
  p.x.resize(n * p.d);
  p.v.resize(n * p.d);
  p.w.resize(n);
  r.doubles(p.x.data(), p.x.size());
  r.doubles(p.v.data(), p.v.size());
  r.doubles(p.w.data(), p.w.size());
  return p;
}

void save_checkpoint(const SimState& s, const RunConfig& cfg, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    w.magic("VNSC");
    w.pod(kCheckpointVersion);
    w.pod(kEndianTag);
    w.str(emit_config(cfg));
    w.pod(s.t);
    w.pod(s.accum_gradint);
    w.pod(s.accum_gradint0);
    w.pod(s.accum_Fnorm);
    w.pod(s.rho_sup_max);
    w.pod<std::uint8_t>(s.strong_existence_ok ? 1 : 0);
    w.pod<std::uint8_t>(s.bootstrap_ok ? 1 : 0);
    w.pod(s.step_index);
    w.doubles(s.conserved_momentum.data(), 3);
    w.pod(s.u0_h12_sq);
    w.pod(s.E0);
    w.pod(s.Emod0);
    w.pod(s.alpha);
    w.pod<std::uint8_t>(s.u.div_free() ? 1 : 0);
    w.pod<std::uint32_t>(s.u.dim());
    w.pod<std::uint32_t>(s.u.n());
    w.doubles(reinterpret_cast<const double*>(s.u.raw().data()), s.u.raw().size() * 2);
    w.pod<std::uint32_t>(s.particles.d);
    w.pod(s.particles.q);
    w.pod(s.particles.v_max);
    w.pod(s.particles.seed);
    w.pod<std::uint64_t>(s.particles.size());
    w.doubles(s.particles.x.data(), s.particles.x.size());
    w.doubles(s.particles.v.data(), s.particles.v.size());
    w.doubles(s.particles.w.data(), s.particles.w.size());
    w.done();
  }
  std::remove(path.c_str());
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot atomically replace checkpoint " + path);
}

std::pair<SimState, RunConfig> load_checkpoint(const std::string& path) {
  Reader r(path);
  r.magic("VNSC");
  r.check_version(kCheckpointVersion);
  RunConfig cfg = parse_config(r.str());
  SimState s;
  s.t = r.pod<double>();
  s.accum_gradint = r.pod<double>();
  s.accum_gradint0 = r.pod<double>();
  s.accum_Fnorm = r.pod<double>();
  s.rho_sup_max = r.pod<double>();
  s.strong_existence_ok = r.pod<std::uint8_t>() != 0;
  s.bootstrap_ok = r.pod<std::uint8_t>() != 0;
  s.step_index = r.pod<std::int64_t>();
  r.doubles(s.conserved_momentum.data(), 3);
  s.u0_h12_sq = r.pod<double>();
  s.E0 = r.pod<double>();
  s.Emod0 = r.pod<double>();
  s.alpha = r.pod<double>();
  auto df = r.pod<std::uint8_t>();
  auto d = r.pod<std::uint32_t>();
  auto n = r.pod<std::uint32_t>();
  s.u = FourierField(spectral::GridSpec(static_cast<int>(d), static_cast<int>(n)), df != 0);
  r.doubles(reinterpret_cast<double*>(s.u.raw().data()), s.u.raw().size() * 2);
  s.particles.d = static_cast<int>(r.pod<std::uint32_t>());
  s.particles.q = r.pod<double>();
  s.particles.v_max = r.pod<double>();
  s.particles.seed = r.pod<std::uint64_t>();
  auto np = r.pod<std::uint64_t>();
  s.particles.x.resize(np * s.particles.d);
  s.particles.v.resize(np * s.particles.d);
  s.particles.w.resize(np);
  r.doubles(s.particles.x.data(), s.particles.x.size());
  r.doubles(s.particles.v.data(), s.particles.v.size());
  r.doubles(s.particles.w.data(), s.particles.w.size());
  return {std::move(s), cfg};
}

namespace {
void write_double(std::ostream& o, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  o << buf;
}
}  // namespace

void write_series_csv(const std::vector<DiagnosticsRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const auto& cols = diag::record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records) {
    auto vals = diag::record_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) out << ",";
      write_double(out, vals[i]);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

int Series::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw IoError("series has no column '" + name + "'");
}

std::vector<double> Series::col(const std::string& name) const {
  int c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

Series read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open series: " + path);
  Series s;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty series: " + path);
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) s.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != s.columns.size()) throw IoError("ragged series row in " + path);
    s.rows.push_back(std::move(row));
  }
  return s;
}

void write_grid_csv(const GridField& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const int d = g.spec.d, n = g.spec.n;
  out << (d == 2 ? "x,y" : "x,y,z");
  for (int c = 0; c < g.comps; ++c) out << ",v" << c;
  out << "\n";
  for (std::size_t p = 0; p < g.spec.points(); ++p) {
    std::size_t rem = p;
    int idx[3] = {0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int a = 0; a < d; ++a) {
      if (a) out << ",";
      write_double(out, double(idx[a]) / n);
    }
    for (int c = 0; c < g.comps; ++c) {
      out << ",";
      write_double(out, g.at(p, c));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_particles_csv(const ParticleEnsemble& p, std::size_t max_rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const int d = p.d;
  out << (d == 2 ? "x0,x1" : "x0,x1,x2") << "," << (d == 2 ? "v0,v1" : "v0,v1,v2")
      << ",w\n";
  std::size_t stride = std::max<std::size_t>(1, p.size() / std::max<std::size_t>(1, max_rows));
  for (std::size_t i = 0; i < p.size(); i += stride) {
    for (int a = 0; a < d; ++a) {
      if (a) out << ",";
      write_double(out, p.x[i * d + a]);
    }
    for (int a = 0; a < d; ++a) {
      out << ",";
      write_double(out, p.v[i * d + a]);
    }
    out << ",";
    write_double(out, p.w[i]);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace vnslab::io
