#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "vnslab/io.hpp"

using namespace vnslab;
using namespace vnslab::io;

namespace {
std::string tmpdir() {
  auto p = std::filesystem::temp_directory_path() / "vnslab_io_test";
  std::filesystem::create_directories(p);
  return p.string();
}
}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("empty text materializes every default") {
    RunConfig c = parse_config("");
    CHECK(c.grid_n == 32);
    CHECK(c.grid_d == 2);
    std::string emitted = emit_config(c);
    // the emitted text parses back to the same config
    RunConfig c2 = parse_config(emitted);
    CHECK(emit_config(c2) == emitted);
    // every schema key appears
    for (const char* key :
         {"grid.d", "grid.n", "particles.q", "init.seed", "time.dt", "monitor.C_star",
          "io.out", "coupling.enabled"})
      CHECK(emitted.find(key) != std::string::npos);
  }
  SUBCASE("comments and whitespace") {
    RunConfig c = parse_config("# a comment\n  grid.n = 64  # trailing\n\n");
    CHECK(c.grid_n == 64);
  }
  SUBCASE("q <= 4 rejected with the decay hypothesis") {
    try {
      (void)parse_config("particles.q = 3\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("must be > 4") != std::string::npos);
    }
  }
  SUBCASE("duplicate key names the line") {
    try {
      (void)parse_config("grid.n = 16\ngrid.n = 32\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("duplicate") != std::string::npos);
    }
  }
  SUBCASE("unknown key rejected") {
    CHECK_THROWS_AS((void)parse_config("grid.m = 16\n"), ConfigError);
  }
  SUBCASE("all violations reported at once") {
    try {
      (void)parse_config("grid.d = 7\nparticles.q = 2\ntime.dt = -1\nmonitor.delta = 0.5\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      CHECK(msg.find("grid.d") != std::string::npos);
      CHECK(msg.find("particles.q") != std::string::npos);
      CHECK(msg.find("time.dt") != std::string::npos);
      CHECK(msg.find("delta e^delta") != std::string::npos);
    }
  }
  SUBCASE("type mismatches") {
    CHECK_THROWS_AS((void)parse_config("grid.n = many\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("coupling.enabled = maybe\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("time.dt = 0.1x\n"), ConfigError);
  }
}

TEST_CASE("binary round trips") {
  std::string dir = tmpdir();
  SUBCASE("fourier field") {
    spectral::GridSpec spec(2, 16);
    Rng rng(3);
    spectral::GridField g(spec, 2);
    for (auto& v : g.values) v = rng.uniform(-1, 1);
    auto f = spectral::analyze(g);
    f.set_div_free(true);
    std::string path = dir + "/field.vnsf";
    save_field(f, path);
    auto f2 = load_field(path);
    CHECK(f2.div_free() == f.div_free());
    CHECK(f2.raw() == f.raw());
  }
  SUBCASE("grid field") {
    spectral::GridSpec spec(2, 8);
    spectral::GridField g(spec, 1);
    Rng rng(5);
    for (auto& v : g.values) v = rng.uniform();
    std::string path = dir + "/grid.vnsg";
    save_grid(g, path);
    auto g2 = load_grid(path);
    CHECK(g2.values == g.values);
    CHECK(g2.comps == 1);
  }
  SUBCASE("ensemble") {
    kinetic::InitialDataSpec s;
    s.d = 2;
    s.v_bins = 6;
    auto p = kinetic::build_particles(s, spectral::GridSpec(2, 8));
    std::string path = dir + "/parts.vnsp";
    save_ensemble(p, path);
    auto p2 = load_ensemble(path);
    CHECK(p2.x == p.x);
    CHECK(p2.v == p.v);
    CHECK(p2.w == p.w);
    CHECK(p2.q == p.q);
    CHECK(p2.v_max == p.v_max);
  }
  SUBCASE("checkpoint embeds the config and round-trips the state bit-exactly") {
    RunConfig cfg = parse_config("grid.n = 16\nparticles.v_bins = 6\ntime.dt = 0.02\n");
    SimState st = make_initial_state(cfg);
    st.t = 0.5;
    st.accum_Fnorm = 0.125;
    st.accum_gradint = 0.0625;
    st.rho_sup_max = 1.375;
    st.bootstrap_ok = false;
    std::string path = dir + "/state.vnsc";
    save_checkpoint(st, cfg, path);
    auto [st2, cfg2] = load_checkpoint(path);
    CHECK(emit_config(cfg2) == emit_config(cfg));
    CHECK(st2.t == st.t);
    CHECK(st2.accum_Fnorm == st.accum_Fnorm);
    CHECK(st2.accum_gradint == st.accum_gradint);
    CHECK(st2.rho_sup_max == st.rho_sup_max);
    CHECK(st2.bootstrap_ok == false);
    CHECK(st2.u.raw() == st.u.raw());
    CHECK(st2.particles.x == st.particles.x);
    CHECK(st2.particles.v == st.particles.v);
    CHECK(st2.particles.w == st.particles.w);
    CHECK(st2.conserved_momentum == st.conserved_momentum);
    CHECK(st2.u0_h12_sq == st.u0_h12_sq);
  }
  SUBCASE("version mismatch rejected, no silent reinterpretation") {
    std::string path = dir + "/bad.vnsf";
    {
      std::FILE* fp = std::fopen(path.c_str(), "wb");
      const char magic[4] = {'V', 'N', 'S', 'F'};
      std::uint32_t version = 99, endian = 0x01020304;
      std::fwrite(magic, 1, 4, fp);
      std::fwrite(&version, 4, 1, fp);
      std::fwrite(&endian, 4, 1, fp);
      std::fclose(fp);
    }
    CHECK_THROWS_AS((void)load_field(path), IoError);
  }
}

TEST_CASE("series CSV") {
  std::string dir = tmpdir();
  SUBCASE("zero records emit a header-only file") {
    std::string path = dir + "/empty.csv";
    write_series_csv({}, path);
    Series s = read_series_csv(path);
    CHECK(s.rows.empty());
    CHECK(s.columns == diag::record_columns());
  }
  SUBCASE("values round-trip at full precision") {
    diag::DiagnosticsRecord r;
    r.t = 0.1234567890123456789;
    r.E = 1.0 / 3.0;
    r.Emod = 1e-17;
    r.mean_u = {0.1, -0.25, 0.0};
    std::string path = dir + "/one.csv";
    write_series_csv({r}, path);
    Series s = read_series_csv(path);
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0][s.column("t")] == r.t);
    CHECK(s.rows[0][s.column("E")] == r.E);
    CHECK(s.rows[0][s.column("Emod")] == r.Emod);
    CHECK(s.rows[0][s.column("mean_u_y")] == -0.25);
  }
}
