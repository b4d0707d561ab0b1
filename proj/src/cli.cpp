#include "hdiv/cli.hpp"

#include "hdiv/channel_stats.hpp"
#include "hdiv/io.hpp"
#include "hdiv/spectrum.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hdiv {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string numbered(const std::string& stem, int step, const std::string& ext)
{
   char buf[64];
   std::snprintf(buf, sizeof(buf), "%s_%06d%s", stem.c_str(), step, ext.c_str());
   return buf;
}

json config_json(const RunConfig& cfg)
{
   json j = json::object();
   for (const auto& [k, v] : config_entries(cfg)) { j[k] = v; }
   return j;
}

void write_json(const json& j, const std::string& path)
{
   std::ofstream out(path, std::ios::trunc);
   if (!out) { throw std::runtime_error("cannot write '" + path + "'"); }
   out << j.dump(2) << "\n";
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what)
{
   std::vector<T> out;
   std::stringstream ss(text);
   std::string item;
   while (std::getline(ss, item, ','))
   {
      std::stringstream is(item);
      T v{};
      is >> v;
      if (is.fail() || !(is >> std::ws).eof()) { throw CLI::ValidationError(what, "bad list entry '" + item + "'"); }
      out.push_back(v);
   }
   if (out.empty()) { throw CLI::ValidationError(what, "empty list"); }
   return out;
}

} // namespace

Problem build_problem(const RunConfig& cfg, bool assemble)
{
   validate_config(cfg);
   CaseParameters cp = cfg.case_params;
   cp.nu = cfg.effective_nu();
   Problem p;
   p.spec = make_case(cp);
   p.mesh = make_case_mesh(p.spec, cfg.cells);
   p.velocity = build_velocity_space(p.mesh, cfg.k);
   p.pressure = build_pressure_space(*p.velocity, cfg.k);
   if (assemble)
   {
      p.ops = std::make_shared<AssembledOperators>(
         assemble_operators(p.velocity, p.pressure, p.spec.nu, cfg.effective_sigma()));
   }
   return p;
}

RunResult execute_run(const RunConfig& cfg, std::ostream& log, bool write_files)
{
   const auto start = std::chrono::steady_clock::now();
   const Problem prob = build_problem(cfg);
   const AssembledOperators& ops = *prob.ops;
   const SchemeConfig sc = cfg.scheme_config();
   const fs::path dir(cfg.output);

   json manifest;
   manifest["format"] = "hdiv-iles-manifest-1";
   manifest["config"] = config_json(cfg);
   manifest["config_text"] = config_to_text(cfg);
   manifest["resolved"] = {{"case", prob.spec.name},
                           {"dim", prob.mesh->dim()},
                           {"nu", prob.spec.nu},
                           {"sigma", cfg.effective_sigma()},
                           {"cells", std::vector<int>(cfg.cells.begin(), cfg.cells.begin() + prob.mesh->dim())},
                           {"velocity_dofs", ops.num_velocity()},
                           {"pressure_dofs", ops.num_pressure()},
                           {"steps", step_count(sc)},
                           {"snapshot_samples", default_sample_grid(*prob.velocity, cfg.snapshot_samples).m},
                           {"parameters", prob.spec.parameters}};
   manifest["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"fftw", std::string(fftw_version)}};
   manifest["status"] = "running";
   std::unique_ptr<TimeseriesWriter> csv;
   if (write_files)
   {
      fs::create_directories(dir);
      write_json(manifest, (dir / "manifest.json").string());
      csv = std::make_unique<TimeseriesWriter>((dir / "timeseries.csv").string());
   }

   RunResult result;
   Diagnostics diag(prob.ops, prob.spec.exact);
   TimeIntegrator integrator(prob.ops, sc, prob.spec.force, prob.spec.zero_force, prob.spec.steady_force);
   FieldState state = initial_state(ops, prob.spec.initial);
   const SampleGrid snap_grid = default_sample_grid(*prob.velocity, cfg.snapshot_samples);
   const bool periodic = prob.mesh->fully_periodic();
   std::vector<std::string> files;

   auto write_spectrum_file = [&](const FieldState& s) {
      if (!write_files || cfg.spectrum_every <= 0 || !periodic) { return; }
      const SpectrumRecord sp = spectrum(*prob.velocity, s.u, s.t, cfg.spectrum_samples);
      const std::string name = numbered("spectrum", s.step, ".csv");
      write_spectrum(sp, (dir / name).string());
      files.push_back(name);
   };

   RunObserver obs;
   const int total = step_count(sc);
   const int report_every = std::max(1, total / 10);
   obs.on_record = [&](const FieldState& s, const StepReport* r) {
      const DiagnosticsRecord rec = diag.record(s, r);
      result.records.push_back(rec);
      if (csv) { csv->append(rec); }
   };
   obs.on_snapshot = [&](const FieldState& s) {
      if (!write_files) { return; }
      const std::string snap = numbered("snapshot", s.step, ".hdiv");
      const std::string st = numbered("state", s.step, ".state");
      write_snapshot(make_snapshot(*prob.velocity, s.u, s.t, snap_grid), (dir / snap).string());
      write_state({s.t, s.step, s.u, s.p}, (dir / st).string());
      files.push_back(snap);
      files.push_back(st);
   };
   obs.on_step = [&](const FieldState& s, const StepReport& r) {
      if (cfg.spectrum_every > 0 && s.step % cfg.spectrum_every == 0) { write_spectrum_file(s); }
      if (s.step % report_every == 0 || s.step == total)
      {
         log << "step " << s.step << "/" << total << " t=" << format_double(s.t)
             << " ke=" << format_double(0.5 * s.u.dot(ops.mass * s.u)) << " div=" << r.div_max
             << " budget_rel=" << r.budget_relative() << "\n";
      }
   };

   RunSchedule sched;
   sched.record_every = cfg.record_every;
   sched.snapshot_every = cfg.snapshot_every;
   try
   {
      write_spectrum_file(state);
      result.summary = run(integrator, state, sched, obs);
   }
   catch (const std::exception& e)
   {
      if (write_files)
      {
         manifest["status"] = "failed";
         manifest["error"] = e.what();
         manifest["files"] = files;
         write_json(manifest, (dir / "manifest.json").string());
      }
      throw;
   }
   result.final_state = state;
   result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
   if (write_files)
   {
      manifest["status"] = "completed";
      manifest["summary"] = {{"steps", result.summary.steps},
                             {"final_t", state.t},
                             {"max_div", result.summary.max_div},
                             {"max_budget_relative", result.summary.max_budget_relative},
                             {"records", result.records.size()},
                             {"wall_seconds", result.wall_seconds}};
      manifest["files"] = files;
      write_json(manifest, (dir / "manifest.json").string());
   }
   return result;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& base, const std::vector<int>& orders,
                                              const std::vector<int>& cells, const std::vector<double>& dts)
{
   if (orders.empty() || cells.empty() || dts.empty()) { throw std::invalid_argument("empty refinement lists"); }
   std::ostream null(nullptr);
   std::vector<ConvergenceRow> rows;
   auto measure = [&](int k, int n, double dt) {
      RunConfig cfg = base;
      cfg.k = k;
      cfg.cells = {n, n, n};
      cfg.dt = dt;
      cfg.record_every = std::max(1, step_count(cfg.scheme_config()));
      cfg.snapshot_every = 0;
      cfg.spectrum_every = 0;
      const RunResult r = execute_run(cfg, null, false);
      const Problem prob = build_problem(cfg, false);
      if (!prob.spec.exact) { throw std::invalid_argument("case '" + prob.spec.name + "' has no exact solution"); }
      const ErrorNorms e = error_vs_exact(*prob.velocity, r.final_state.u, *prob.spec.exact, r.final_state.t);
      ConvergenceRow row;
      row.k = k;
      row.n = n;
      row.dt = dt;
      row.err_l2 = e.l2;
      row.err_h1 = e.h1;
      row.order_l2 = std::nan("");
      row.order_h1 = std::nan("");
      return row;
   };
   auto add_order = [](ConvergenceRow& cur, const ConvergenceRow& prev, double ratio) {
      cur.order_l2 = std::log(prev.err_l2 / cur.err_l2) / std::log(ratio);
      cur.order_h1 = std::log(prev.err_h1 / cur.err_h1) / std::log(ratio);
   };
   if (dts.size() > 1)
   {
      for (std::size_t i = 0; i < dts.size(); ++i)
      {
         rows.push_back(measure(orders[0], cells[0], dts[i]));
         if (i > 0) { add_order(rows.back(), rows[rows.size() - 2], dts[i - 1] / dts[i]); }
      }
      return rows;
   }
   for (int k : orders)
   {
      for (std::size_t i = 0; i < cells.size(); ++i)
      {
         rows.push_back(measure(k, cells[i], dts[0]));
         if (i > 0) { add_order(rows.back(), rows[rows.size() - 2], static_cast<double>(cells[i]) / cells[i - 1]); }
      }
   }
   return rows;
}

namespace {

int cmd_run(const std::string& config_path, const std::string& output, const std::vector<std::string>& sets,
            std::ostream& out)
{
   RunConfig cfg = load_config(config_path);
   for (const auto& s : sets) { apply_override(cfg, s); }
   if (!output.empty()) { cfg.output = output; }
   const RunResult r = execute_run(cfg, out, true);
   out << "completed " << r.summary.steps << " steps; max div " << r.summary.max_div << "; max budget residual "
       << r.summary.max_budget_relative << " (relative); output in " << cfg.output << "\n";
   return 0;
}

int cmd_convergence(const RunConfig& base, const std::string& orders, const std::string& cells,
                    const std::string& dts, const std::string& output, std::ostream& out)
{
   const auto rows = convergence_study(base, parse_list<int>(orders, "--orders"), parse_list<int>(cells, "--cells"),
                                       dts.empty() ? std::vector<double>{base.dt} : parse_list<double>(dts, "--dts"));
   std::ostringstream table;
   table << "k,N,dt,err_l2,err_h1,order_l2,order_h1\n";
   for (const auto& r : rows)
   {
      table << r.k << "," << r.n << "," << format_double(r.dt) << "," << format_double(r.err_l2) << ","
            << format_double(r.err_h1) << "," << (std::isnan(r.order_l2) ? "nan" : format_double(r.order_l2)) << ","
            << (std::isnan(r.order_h1) ? "nan" : format_double(r.order_h1)) << "\n";
   }
   out << table.str();
   if (!output.empty())
   {
      std::ofstream f(output, std::ios::trunc);
      if (!f) { throw std::runtime_error("cannot write '" + output + "'"); }
      f << table.str();
   }
   return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& nus, const std::string& output, std::ostream& out)
{
   const RunConfig base = load_config(config_path);
   const fs::path root(output.empty() ? base.output : output);
   for (double nu : parse_list<double>(nus, "--nu"))
   {
      RunConfig cfg = base;
      cfg.case_params.nu = nu;
      cfg.nu_given = true;
      if (cfg.case_params.name == "tgv3d") { cfg.case_params.re = 1.0 / nu; }
      char name[64];
      std::snprintf(name, sizeof(name), "nu_%.6g", nu);
      cfg.output = (root / name).string();
      validate_config(cfg);
      const RunResult r = execute_run(cfg, out, true);
      out << "nu=" << format_double(nu) << " steps=" << r.summary.steps << " output=" << cfg.output << "\n";
   }
   return 0;
}

int cmd_stats(const std::string& run_dir, const std::string& window, const std::string& output, std::ostream& out)
{
   const auto colon = window.find(':');
   if (colon == std::string::npos) { throw CLI::ValidationError("--window", "expected t0:t1"); }
   const double t0 = std::stod(window.substr(0, colon));
   const double t1 = std::stod(window.substr(colon + 1));
   if (!(t1 >= t0)) { throw CLI::ValidationError("--window", "t1 must be >= t0"); }

   std::ifstream mf((fs::path(run_dir) / "manifest.json").string());
   if (!mf) { throw std::runtime_error("no manifest.json in '" + run_dir + "'"); }
   const json manifest = json::parse(mf);
   const RunConfig cfg = parse_config(manifest.at("config_text").get<std::string>());
   const Problem prob = build_problem(cfg, false);
   ChannelStatsAccumulator acc(prob.velocity, prob.spec.nu);

   std::vector<fs::path> states;
   for (const auto& e : fs::directory_iterator(run_dir))
   {
      if (e.path().extension() == ".state") { states.push_back(e.path()); }
   }
   std::sort(states.begin(), states.end());
   for (const auto& p : states)
   {
      const StateFile s = read_state(p.string());
      if (s.t < t0 - 1e-12 || s.t > t1 + 1e-12) { continue; }
      if (s.u.size() != prob.velocity->num_dofs())
      {
         throw std::runtime_error("'" + p.string() + "' does not match the run configuration");
      }
      acc.add(s.u, s.t);
   }
   const ChannelStats st = acc.result();
   const std::string path = output.empty() ? (fs::path(run_dir) / "channel_stats.csv").string() : output;
   write_channel_stats(st, path);
   out << "samples=" << st.samples << " window=[" << format_double(st.t_begin) << "," << format_double(st.t_end)
       << "] u_tau=" << format_double(st.u_tau) << " re_tau=" << format_double(st.re_tau) << " -> " << path << "\n";
   return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
   CLI::App app{"H(div)-conforming dG incompressible flow solver"};
   app.require_subcommand(1);
   app.set_help_all_flag("--help-all");

   std::string config_path, output;
   std::vector<std::string> sets;
   auto* run = app.add_subcommand("run", "run a configuration file");
   run->add_option("--config,-c", config_path, "configuration file")->required()->check(CLI::ExistingFile);
   run->add_option("--output,-o", output, "output directory (overrides the config)");
   run->add_option("--set", sets, "override key=value (repeatable)");

   std::string case_name = "lattice2d", orders = "1,2", cells = "4,8,16", dts, scheme = "bdf2", solver = "direct";
   double nu = 1e-2, dt = 1e-3, t_end = 0.1;
   auto* conv = app.add_subcommand("convergence", "observed orders of an (h, k, dt) refinement");
   conv->add_option("--case", case_name, "case with an exact solution");
   conv->add_option("--nu", nu, "viscosity");
   conv->add_option("--orders", orders, "polynomial orders, comma separated");
   conv->add_option("--cells", cells, "cells per axis, comma separated");
   conv->add_option("--dt", dt, "time step of the spatial study");
   conv->add_option("--dts", dts, "time steps of a temporal study, comma separated");
   conv->add_option("--t-end", t_end, "final time");
   conv->add_option("--scheme", scheme, "be-imex or bdf2-imex");
   conv->add_option("--solver", solver, "direct or iterative");
   conv->add_option("--output,-o", output, "CSV file for the order table");

   std::string nus;
   auto* sweep = app.add_subcommand("sweep", "repeat a run over several viscosities");
   sweep->add_option("--config,-c", config_path, "configuration file")->required()->check(CLI::ExistingFile);
   sweep->add_option("--nu", nus, "viscosities, comma separated")->required();
   sweep->add_option("--output,-o", output, "root output directory");

   std::string run_dir, window = "0:1e300";
   auto* stats = app.add_subcommand("stats", "channel statistics from the state files of a run");
   stats->add_option("--run", run_dir, "run output directory")->required()->check(CLI::ExistingDirectory);
   stats->add_option("--window", window, "averaging window t0:t1");
   stats->add_option("--output,-o", output, "CSV file (default <run>/channel_stats.csv)");

   std::vector<std::string> reversed(args.rbegin(), args.rend());
   try
   {
      app.parse(reversed);
   }
   catch (const CLI::CallForHelp&)
   {
      out << app.help();
      return 0;
   }
   catch (const CLI::CallForAllHelp&)
   {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
   }
   catch (const CLI::ParseError& e)
   {
      err << "error: " << e.what() << "\n\n" << app.help();
      return 2;
   }

   try
   {
      if (run->parsed()) { return cmd_run(config_path, output, sets, out); }
      if (conv->parsed())
      {
         RunConfig base;
         base.case_params.name = case_name;
         base.case_params.nu = nu;
         base.nu_given = true;
         base.dt = dt;
         base.t_end = t_end;
         base.scheme = parse_scheme(scheme);
         base.solver = parse_solver_kind(solver);
         validate_config(base);
         return cmd_convergence(base, orders, cells, dts, output, out);
      }
      if (sweep->parsed()) { return cmd_sweep(config_path, nus, output, out); }
      if (stats->parsed()) { return cmd_stats(run_dir, window, output, out); }
   }
   catch (const CLI::ValidationError& e)
   {
      err << "error: " << e.what() << "\n";
      return 2;
   }
   catch (const ConfigError& e)
   {
      err << "error: " << e.what() << "\n";
      return 2;
   }
   catch (const std::invalid_argument& e)
   {
      err << "error: " << e.what() << "\n";
      return 2;
   }
   catch (const std::exception& e)
   {
      err << "failed: " << e.what() << "\n";
      return 1;
   }
   return 2;
}

int cli_main(int argc, char** argv)
{
   std::vector<std::string> args(argv + 1, argv + argc);
   return cli_main(args, std::cout, std::cerr);
}

} // namespace hdiv
