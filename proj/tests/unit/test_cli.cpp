#include "hdiv/cli.hpp"
#include "hdiv/io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hdiv;
using namespace hdiv::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
   const fs::path p = fs::temp_directory_path() / "hdiv_cli_tests" / name;
   fs::remove_all(p);
   fs::create_directories(p);
   return p;
}

std::string write_config(const fs::path& dir, const std::string& text)
{
   const fs::path p = dir / "run.cfg";
   std::ofstream(p) << text;
   return p.string();
}

struct CliResult
{
   int code;
   std::string out;
   std::string err;
};

CliResult cli(const std::vector<std::string>& args)
{
   std::ostringstream out, err;
   const int code = cli_main(args, out, err);
   return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
   std::ifstream in(p);
   return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST(Cli, BadArgumentsExitWithTwo)
{
   EXPECT_EQ(cli({}).code, 2);
   EXPECT_EQ(cli({"frobnicate"}).code, 2);
   EXPECT_EQ(cli({"run"}).code, 2);
   EXPECT_EQ(cli({"run", "--config", "/nonexistent.cfg"}).code, 2);
   EXPECT_EQ(cli({"--help"}).code, 0);

   const fs::path dir = scratch("bad");
   const std::string cfg = write_config(dir, "case = lattice2d\nnu = 1e-3\nk = 1\nN = 2\ndt = -1\nt_end = 1\n");
   const CliResult r = cli({"run", "--config", cfg});
   EXPECT_EQ(r.code, 2);
   EXPECT_NE(r.err.find("dt"), std::string::npos) << r.err;
   EXPECT_EQ(cli({"convergence", "--case", "lattice2d", "--nu", "-1"}).code, 2);
}

TEST(Cli, RunWritesTimeseriesManifestAndSnapshots)
{
   const fs::path dir = scratch("run");
   const std::string cfg = write_config(
      dir, "case = lattice2d\nnu = 1e-2\nk = 2\nN = 4\ndt = 0.01\nt_end = 0.05\nrecord_every = 2\n"
           "snapshot_every = 5\nspectrum_every = 5\nscheme = bdf2\n");
   const CliResult r = cli({"run", "--config", cfg, "--output", (dir / "out").string()});
   ASSERT_EQ(r.code, 0) << r.err;
   const auto rows = read_timeseries((dir / "out" / "timeseries.csv").string());
   ASSERT_EQ(rows.size(), 4u);  // t = 0, 0.02, 0.04, 0.05
   EXPECT_NEAR(rows.back().t, 0.05, 1e-14);
   EXPECT_NEAR(rows.front().ke, 1.0, 0.05);
   for (const auto& row : rows)
   {
      EXPECT_LE(row.div_max, 1e-10);
      EXPECT_FALSE(std::isnan(row.err_l2));
   }
   const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
   EXPECT_EQ(manifest.at("status"), "completed");
   EXPECT_EQ(manifest.at("summary").at("steps"), 5);
   EXPECT_EQ(parse_config(manifest.at("config_text").get<std::string>()).k, 2);
   int snaps = 0, states = 0, spectra = 0;
   for (const auto& e : fs::directory_iterator(dir / "out"))
   {
      snaps += e.path().extension() == ".hdiv";
      states += e.path().extension() == ".state";
      spectra += e.path().filename().string().rfind("spectrum", 0) == 0;
   }
   EXPECT_EQ(snaps, 2);
   EXPECT_EQ(states, 2);
   EXPECT_EQ(spectra, 2);
}

TEST(Cli, OverridesAndDeterministicOutput)
{
   const fs::path dir = scratch("det");
   const std::string cfg =
      write_config(dir, "case = lattice2d\nnu = 1e-3\nk = 1\nN = 3\ndt = 0.05\nt_end = 0.2\n");
   ASSERT_EQ(cli({"run", "-c", cfg, "-o", (dir / "a").string(), "--set", "scheme=bdf2"}).code, 0);
   ASSERT_EQ(cli({"run", "-c", cfg, "-o", (dir / "b").string(), "--set", "scheme=bdf2"}).code, 0);
   const std::string a = slurp(dir / "a" / "timeseries.csv");
   EXPECT_FALSE(a.empty());
   EXPECT_EQ(a, slurp(dir / "b" / "timeseries.csv"));
   const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
   EXPECT_EQ(parse_config(m.at("config_text").get<std::string>()).scheme, Scheme::Bdf2);
   EXPECT_EQ(cli({"run", "-c", cfg, "--set", "k=99"}).code, 2);
}

TEST(Cli, ConvergenceTable)
{
   const fs::path dir = scratch("conv");
   const CliResult r = cli({"convergence", "--case", "lattice2d", "--nu", "0.01", "--orders", "1,2", "--cells",
                            "4,8", "--dt", "1e-3", "--t-end", "0.002", "--output", (dir / "orders.csv").string()});
   ASSERT_EQ(r.code, 0) << r.err;
   std::istringstream in(slurp(dir / "orders.csv"));
   std::string line;
   std::getline(in, line);
   EXPECT_EQ(line, "k,N,dt,err_l2,err_h1,order_l2,order_h1");
   std::vector<std::vector<std::string>> rows;
   while (std::getline(in, line))
   {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) { cols.push_back(c); }
      rows.push_back(cols);
   }
   ASSERT_EQ(rows.size(), 4u);
   EXPECT_EQ(rows[0][5], "nan");
   EXPECT_GT(std::stod(rows[1][5]), 1.5);
   EXPECT_GT(std::stod(rows[3][5]), 2.5);
}

TEST(Cli, StatsOnLaminarChannel)
{
   const fs::path dir = scratch("chan");
   const std::string cfg = write_config(
      dir, "case = channel_laminar\nchannel_dim = 2\nre_tau = 10\nnu = 0.05\nk = 2\ncells = 2,4\ndt = 0.05\n"
           "t_end = 0.1\nsnapshot_every = 1\n");
   ASSERT_EQ(cli({"run", "-c", cfg, "-o", (dir / "out").string()}).code, 0);
   const CliResult r = cli({"stats", "--run", (dir / "out").string(), "--window", "0:1"});
   ASSERT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("samples=3"), std::string::npos) << r.out;
   std::istringstream in(slurp(dir / "out" / "channel_stats.csv"));
   std::string header;
   std::getline(in, header);
   EXPECT_EQ(header.rfind("y,y_plus,mean_u1", 0), 0u);
   EXPECT_EQ(cli({"stats", "--run", (dir / "out").string(), "--window", "5:6"}).code, 1);
   EXPECT_EQ(cli({"stats", "--run", (dir / "out").string(), "--window", "oops"}).code, 2);
}

TEST(Cli, ExecutableExitCodes)
{
   const std::string exe = HDIV_CLI_PATH;
   EXPECT_EQ(WEXITSTATUS(std::system((exe + " > /dev/null 2>&1").c_str())), 2);
   EXPECT_EQ(WEXITSTATUS(std::system((exe + " --help > /dev/null 2>&1").c_str())), 0);
   const fs::path dir = scratch("exe");
   const std::string cfg =
      write_config(dir, "case = lattice3d\nnu = 0.1\nk = 1\nN = 2\ndt = 0.1\nt_end = 0.1\n");
   const std::string cmd = exe + " run -c " + cfg + " -o " + (dir / "out").string() + " > /dev/null 2>&1";
   EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
   EXPECT_TRUE(fs::exists(dir / "out" / "timeseries.csv"));
}
