#pragma once

// File formats: scalar time series (CSV), sampled field snapshots
// (HDIVILES1), coefficient state files (HDIVSTATE1), spectra and channel
// statistics (CSV).

#include "hdiv/channel_stats.hpp"
#include "hdiv/diagnostics.hpp"
#include "hdiv/spectrum.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace hdiv {

inline constexpr const char* kTimeseriesHeader =
   "t,ke,enstrophy,palinstrophy,eps_visc,eps_upw,dke_dt,budget_residual,div_max,err_l2,err_h1";

std::string format_record(const DiagnosticsRecord& r);

/// Appends rows as they arrive and flushes each one.
class TimeseriesWriter
{
public:
   explicit TimeseriesWriter(const std::string& path);
   void append(const DiagnosticsRecord& r);

private:
   std::ofstream out_;
   std::string path_;
};

/// Throws std::invalid_argument for an empty series, std::runtime_error on I/O failure.
void write_timeseries(const std::vector<DiagnosticsRecord>& records, const std::string& path);
std::vector<DiagnosticsRecord> read_timeseries(const std::string& path);

/// Sampled fields on a uniform grid. 2D: u1 u2 omega; 3D: u1 u2 u3 omega1
/// omega2 omega3 q.
struct Snapshot
{
   SampleGrid grid;
   double t = 0.0;
   std::vector<std::string> names;
   std::vector<std::vector<double>> fields;  ///< one row-major array per name
};

Snapshot make_snapshot(const VelocitySpace& space, const Eigen::VectorXd& u, double t, const SampleGrid& grid);
void write_snapshot(const Snapshot& s, const std::string& path);
Snapshot read_snapshot(const std::string& path);

struct StateFile
{
   double t = 0.0;
   int step = 0;
   Eigen::VectorXd u;
   Eigen::VectorXd p;
};

void write_state(const StateFile& s, const std::string& path);
StateFile read_state(const std::string& path);

void write_spectrum(const SpectrumRecord& s, const std::string& path);
void write_channel_stats(const ChannelStats& s, const std::string& path);

} // namespace hdiv
