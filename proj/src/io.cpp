#include "hdiv/io.hpp"

#include "hdiv/config.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace hdiv {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string fmt(double v)
{
   if (std::isnan(v)) { return "nan"; }
   if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
   return format_double(v);
}

double parse_field(const std::string& s, int line)
{
   if (s == "nan") { return std::nan(""); }
   if (s == "inf") { return INFINITY; }
   if (s == "-inf") { return -INFINITY; }
   char* end = nullptr;
   const double v = std::strtod(s.c_str(), &end);
   if (s.empty() || end != s.c_str() + s.size())
   {
      throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
   }
   return v;
}

std::ofstream open_out(const std::string& path, bool binary = false)
{
   std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
   if (!out) { throw std::runtime_error("cannot write '" + path + "'"); }
   return out;
}

std::ifstream open_in(const std::string& path)
{
   std::ifstream in(path, std::ios::binary);
   if (!in) { throw std::runtime_error("cannot read '" + path + "'"); }
   return in;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t n)
{
   out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n, const std::string& path)
{
   in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
   if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
   {
      throw std::runtime_error("'" + path + "' is truncated");
   }
}

// Reads `key value...` header lines until `end`.
std::vector<std::vector<std::string>> read_header(std::ifstream& in, const std::string& magic, const std::string& path)
{
   std::string line;
   if (!std::getline(in, line) || line != magic)
   {
      throw std::runtime_error("'" + path + "' is not a " + magic + " file");
   }
   std::vector<std::vector<std::string>> rows;
   while (std::getline(in, line))
   {
      if (line == "end") { return rows; }
      std::stringstream ss(line);
      std::vector<std::string> words;
      std::string w;
      while (ss >> w) { words.push_back(w); }
      if (!words.empty()) { rows.push_back(words); }
   }
   throw std::runtime_error("'" + path + "' has no header terminator");
}

const std::vector<std::string>& header_row(const std::vector<std::vector<std::string>>& rows, const std::string& key,
                                           std::size_t min_values, const std::string& path)
{
   for (const auto& r : rows)
   {
      if (r[0] == key)
      {
         if (r.size() < min_values + 1) { break; }
         return r;
      }
   }
   throw std::runtime_error("'" + path + "': header entry '" + key + "' missing or incomplete");
}

} // namespace

std::string format_record(const DiagnosticsRecord& r)
{
   std::string s = fmt(r.t);
   for (double v : {r.ke, r.enstrophy, r.palinstrophy, r.eps_visc, r.eps_upw, r.dke_dt, r.budget_residual, r.div_max,
                    r.err_l2, r.err_h1})
   {
      s += ",";
      s += fmt(v);
   }
   return s;
}

TimeseriesWriter::TimeseriesWriter(const std::string& path) : out_(open_out(path)), path_(path)
{
   out_ << kTimeseriesHeader << "\n";
   out_.flush();
}

void TimeseriesWriter::append(const DiagnosticsRecord& r)
{
   out_ << format_record(r) << "\n";
   out_.flush();
   if (!out_) { throw std::runtime_error("write to '" + path_ + "' failed"); }
}

void write_timeseries(const std::vector<DiagnosticsRecord>& records, const std::string& path)
{
   if (records.empty()) { throw std::invalid_argument("write_timeseries: no records"); }
   TimeseriesWriter w(path);
   for (const auto& r : records) { w.append(r); }
}

std::vector<DiagnosticsRecord> read_timeseries(const std::string& path)
{
   std::ifstream in = open_in(path);
   std::string line;
   if (!std::getline(in, line) || line != kTimeseriesHeader)
   {
      throw std::runtime_error("'" + path + "' does not start with the time series header");
   }
   std::vector<DiagnosticsRecord> out;
   int number = 1;
   while (std::getline(in, line))
   {
      ++number;
      if (line.empty()) { continue; }
      std::vector<double> v;
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) { v.push_back(parse_field(item, number)); }
      if (v.size() != 11) { throw std::runtime_error("line " + std::to_string(number) + ": expected 11 columns"); }
      DiagnosticsRecord r;
      r.t = v[0];
      r.ke = v[1];
      r.enstrophy = v[2];
      r.palinstrophy = v[3];
      r.eps_visc = v[4];
      r.eps_upw = v[5];
      r.dke_dt = v[6];
      r.budget_residual = v[7];
      r.div_max = v[8];
      r.err_l2 = v[9];
      r.err_h1 = v[10];
      out.push_back(r);
   }
   return out;
}

Snapshot make_snapshot(const VelocitySpace& space, const Eigen::VectorXd& u, double t, const SampleGrid& grid)
{
   const int d = space.dim();
   Snapshot s;
   s.grid = grid;
   s.t = t;
   if (d == 2) { s.names = {"u1", "u2", "omega"}; }
   else { s.names = {"u1", "u2", "u3", "omega1", "omega2", "omega3", "q"}; }
   const std::vector<FieldJet> jets = sample_field(space, u, grid);
   s.fields.assign(s.names.size(), std::vector<double>(jets.size()));
   for (std::size_t i = 0; i < jets.size(); ++i)
   {
      const Vec3 om = vorticity(jets[i], d);
      for (int c = 0; c < d; ++c) { s.fields[c][i] = jets[i].value[c]; }
      if (d == 2) { s.fields[2][i] = om[2]; }
      else
      {
         for (int c = 0; c < 3; ++c) { s.fields[3 + c][i] = om[c]; }
         s.fields[6][i] = q_value(jets[i].grad);
      }
   }
   return s;
}

void write_snapshot(const Snapshot& s, const std::string& path)
{
   const SampleGrid& g = s.grid;
   if (s.names.size() != s.fields.size()) { throw std::invalid_argument("snapshot names and fields differ"); }
   for (const auto& f : s.fields)
   {
      if (static_cast<int>(f.size()) != g.size()) { throw std::invalid_argument("snapshot field size mismatch"); }
   }
   std::ofstream out = open_out(path, true);
   out << "HDIVILES1\n";
   out << "dim " << g.dim << "\n";
   out << "box";
   for (int a = 0; a < g.dim; ++a) { out << " " << fmt(g.lower[a]) << " " << fmt(g.upper[a]); }
   out << "\nsamples";
   for (int a = 0; a < g.dim; ++a) { out << " " << g.m[a]; }
   out << "\nt " << fmt(s.t) << "\nfields";
   for (const auto& n : s.names) { out << " " << n; }
   out << "\nlayout row-major-last-axis-fastest\nencoding float64-le\nend\n";
   for (const auto& f : s.fields) { write_doubles(out, f.data(), f.size()); }
   if (!out) { throw std::runtime_error("write to '" + path + "' failed"); }
}

Snapshot read_snapshot(const std::string& path)
{
   std::ifstream in = open_in(path);
   const auto rows = read_header(in, "HDIVILES1", path);
   Snapshot s;
   const int d = std::stoi(header_row(rows, "dim", 1, path)[1]);
   if (d != 2 && d != 3) { throw std::runtime_error("'" + path + "': bad dimension"); }
   s.grid.dim = d;
   const auto& box = header_row(rows, "box", 2 * d, path);
   const auto& samples = header_row(rows, "samples", d, path);
   for (int a = 0; a < d; ++a)
   {
      s.grid.lower[a] = parse_field(box[1 + 2 * a], 0);
      s.grid.upper[a] = parse_field(box[2 + 2 * a], 0);
      s.grid.m[a] = std::stoi(samples[1 + a]);
      if (s.grid.m[a] < 1) { throw std::runtime_error("'" + path + "': bad sample count"); }
   }
   s.t = parse_field(header_row(rows, "t", 1, path)[1], 0);
   const auto& names = header_row(rows, "fields", 1, path);
   s.names.assign(names.begin() + 1, names.end());
   const auto& enc = header_row(rows, "encoding", 1, path);
   if (enc[1] != "float64-le") { throw std::runtime_error("'" + path + "': unsupported encoding " + enc[1]); }
   s.fields.assign(s.names.size(), std::vector<double>(s.grid.size()));
   for (auto& f : s.fields) { read_doubles(in, f.data(), f.size(), path); }
   return s;
}

void write_state(const StateFile& s, const std::string& path)
{
   std::ofstream out = open_out(path, true);
   out << "HDIVSTATE1\nt " << fmt(s.t) << "\nstep " << s.step << "\nvelocity " << s.u.size() << "\npressure "
       << s.p.size() << "\nencoding float64-le\nend\n";
   write_doubles(out, s.u.data(), static_cast<std::size_t>(s.u.size()));
   write_doubles(out, s.p.data(), static_cast<std::size_t>(s.p.size()));
   if (!out) { throw std::runtime_error("write to '" + path + "' failed"); }
}

StateFile read_state(const std::string& path)
{
   std::ifstream in = open_in(path);
   const auto rows = read_header(in, "HDIVSTATE1", path);
   StateFile s;
   s.t = parse_field(header_row(rows, "t", 1, path)[1], 0);
   s.step = std::stoi(header_row(rows, "step", 1, path)[1]);
   const long nu = std::stol(header_row(rows, "velocity", 1, path)[1]);
   const long np = std::stol(header_row(rows, "pressure", 1, path)[1]);
   if (nu < 0 || np < 0) { throw std::runtime_error("'" + path + "': bad sizes"); }
   s.u.resize(nu);
   s.p.resize(np);
   read_doubles(in, s.u.data(), static_cast<std::size_t>(nu), path);
   read_doubles(in, s.p.data(), static_cast<std::size_t>(np), path);
   return s;
}

void write_spectrum(const SpectrumRecord& s, const std::string& path)
{
   std::ofstream out = open_out(path);
   out << "kappa,energy\n";
   for (std::size_t i = 0; i < s.energy.size(); ++i) { out << fmt(s.kappa[i]) << "," << fmt(s.energy[i]) << "\n"; }
   if (!out) { throw std::runtime_error("write to '" + path + "' failed"); }
}

void write_channel_stats(const ChannelStats& s, const std::string& path)
{
   std::ofstream out = open_out(path);
   out << "y,y_plus,mean_u1,mean_u2,mean_u3,uu,vv,ww,uv,rms_u1,rms_u2,rms_u3,u_plus,uv_plus,rms_u1_plus,"
          "rms_u2_plus,rms_u3_plus\n";
   for (std::size_t i = 0; i < s.y.size(); ++i)
   {
      const double row[] = {s.y[i],      s.y_plus[i],  s.mean[0][i],     s.mean[1][i],     s.mean[2][i], s.uu[i],
                            s.vv[i],     s.ww[i],      s.uv[i],          s.rms[0][i],      s.rms[1][i],  s.rms[2][i],
                            s.u_plus[i], s.uv_plus[i], s.rms_plus[0][i], s.rms_plus[1][i], s.rms_plus[2][i]};
      for (std::size_t j = 0; j < std::size(row); ++j) { out << (j ? "," : "") << fmt(row[j]); }
      out << "\n";
   }
   if (!out) { throw std::runtime_error("write to '" + path + "' failed"); }
}

} // namespace hdiv
