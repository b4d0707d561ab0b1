#pragma once

// Run driver and command line entry points.

#include "hdiv/config.hpp"
#include "hdiv/diagnostics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hdiv {

/// Case, mesh, spaces and fixed operators of a configuration.
struct Problem
{
   CaseSpec spec;
   std::shared_ptr<const CartesianMesh> mesh;
   std::shared_ptr<const VelocitySpace> velocity;
   std::shared_ptr<const PressureSpace> pressure;
   std::shared_ptr<const AssembledOperators> ops;
};

/// With `assemble == false` only the mesh and spaces are built.
Problem build_problem(const RunConfig& cfg, bool assemble = true);

struct RunResult
{
   RunSummary summary;
   std::vector<DiagnosticsRecord> records;
   FieldState final_state;
   double wall_seconds = 0.0;
};

/// Runs a configuration. With `write_files` the output directory receives
/// timeseries.csv, manifest.json, snapshots, state files and spectra.
RunResult execute_run(const RunConfig& cfg, std::ostream& log, bool write_files = true);

struct ConvergenceRow
{
   int k = 0;
   int n = 0;
   double dt = 0.0;
   double err_l2 = 0.0;
   double err_h1 = 0.0;
   double order_l2 = 0.0;  ///< NaN for the first row of a sequence
   double order_h1 = 0.0;
};

/// Spatial study (several cells, one dt) or, with more than one dt, a
/// temporal study at the first order and cell count. Errors are measured
/// against the exact solution at t_end. Orders are log(e_i/e_{i+1}) /
/// log(h_i/h_{i+1}) with h = 1/N or h = dt.
std::vector<ConvergenceRow> convergence_study(const RunConfig& base, const std::vector<int>& orders,
                                              const std::vector<int>& cells, const std::vector<double>& dts);

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace hdiv
