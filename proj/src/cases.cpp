#include "hdiv/cases.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 zero_vec(double, const Point&)
{
   return {0.0, 0.0, 0.0};
}

MeshSpec periodic_box(int dim, double lo, double hi)
{
   MeshSpec m;
   m.dim = dim;
   for (int a = 0; a < 3; ++a)
   {
      m.lower[a] = a < dim ? lo : 0.0;
      m.upper[a] = a < dim ? hi : 1.0;
      m.bc[a] = AxisBc::Periodic;
   }
   return m;
}

/// Lattice (Taylor cell) field u = (sx sy, cx cy, sqrt2/(2pi) sx cy) e^{-8 pi^2 nu t}
/// with w = 2 pi; the third component only when `three` is set.
AnalyticField lattice_field(double nu, bool three)
{
   const double w = 2.0 * kPi;
   const double lam = 2.0 * w * w;  // -lap u = lam u
   const double r3 = std::sqrt(2.0) / w;
   AnalyticField f;
   auto decay = [nu, lam](double t) { return std::exp(-lam * nu * t); };
   f.velocity = [=](double t, const Point& x) -> Vec3 {
      const double e = decay(t);
      const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
      const double sy = std::sin(w * x[1]), cy = std::cos(w * x[1]);
      return {sx * sy * e, cx * cy * e, three ? r3 * sx * cy * e : 0.0};
   };
   f.gradient = [=](double t, const Point& x) -> Mat3 {
      const double e = decay(t);
      const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
      const double sy = std::sin(w * x[1]), cy = std::cos(w * x[1]);
      Mat3 g{};
      g[0][0] = w * cx * sy * e;
      g[0][1] = w * sx * cy * e;
      g[1][0] = -w * sx * cy * e;
      g[1][1] = -w * cx * sy * e;
      if (three)
      {
         g[2][0] = r3 * w * cx * cy * e;
         g[2][1] = -r3 * w * sx * sy * e;
      }
      return g;
   };
   f.laplacian = [=](double t, const Point& x) -> Vec3 {
      const Vec3 u = f.velocity(t, x);
      return {-lam * u[0], -lam * u[1], -lam * u[2]};
   };
   f.time_derivative = [=](double t, const Point& x) -> Vec3 {
      const Vec3 u = f.velocity(t, x);
      return {-lam * nu * u[0], -lam * nu * u[1], -lam * nu * u[2]};
   };
   // (u.grad)u = -grad p with p = (cos 2wx - cos 2wy)/4 e^{-2 lam nu t}.
   f.pressure = [=](double t, const Point& x) {
      const double e = decay(t);
      return 0.25 * (std::cos(2.0 * w * x[0]) - std::cos(2.0 * w * x[1])) * e * e;
   };
   f.pressure_gradient = [=](double t, const Point& x) -> Vec3 {
      const double e = decay(t);
      return {-0.5 * w * std::sin(2.0 * w * x[0]) * e * e, 0.5 * w * std::sin(2.0 * w * x[1]) * e * e, 0.0};
   };
   return f;
}

Vec3 convective(const Mat3& g, const Vec3& u)
{
   Vec3 r{0.0, 0.0, 0.0};
   for (int i = 0; i < 3; ++i)
   {
      for (int a = 0; a < 3; ++a) { r[i] += g[i][a] * u[a]; }
   }
   return r;
}

/// Smooth random divergence-free perturbation vanishing (with its gradient) at the walls.
class ChannelPerturbation
{
public:
   ChannelPerturbation(const ChannelOptions& opt, const MeshSpec& dom)
      : dim_(opt.dim), h_(opt.height)
   {
      std::mt19937_64 rng(opt.seed);
      std::uniform_real_distribution<double> amp(-1.0, 1.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      std::uniform_int_distribution<int> wave(1, 4);
      std::uniform_int_distribution<int> wall_wave(0, 3);
      const double l1 = dom.upper[0] - dom.lower[0];
      const double l3 = dom.upper[2] - dom.lower[2];
      const int comps = dim_ == 3 ? 3 : 1;
      for (int i = 0; i < comps; ++i)
      {
         for (int m = 0; m < 8; ++m)
         {
            Mode md;
            md.component = dim_ == 3 ? i : 2;
            md.amplitude = amp(rng);
            md.k1 = 2.0 * kPi * wave(rng) / l1;
            md.k3 = dim_ == 3 ? 2.0 * kPi * wave(rng) / l3 : 0.0;
            md.k2 = kPi * wall_wave(rng) / h_;
            md.phase = phase(rng);
            modes_.push_back(md);
         }
      }
   }

   Vec3 raw(const Point& x) const
   {
      // d[i][a] = d A_i / d x_a
      Mat3 d{};
      const double eta = x[1] / h_;
      const double wv = (1.0 - eta * eta) * (1.0 - eta * eta);
      const double dw = -4.0 * eta * (1.0 - eta * eta) / h_;
      for (const Mode& m : modes_)
      {
         const double th = m.k1 * x[0] + m.k2 * x[1] + m.k3 * x[2] + m.phase;
         const double s = std::sin(th), c = std::cos(th);
         d[m.component][0] += m.amplitude * wv * m.k1 * c;
         d[m.component][1] += m.amplitude * (dw * s + wv * m.k2 * c);
         d[m.component][2] += m.amplitude * wv * m.k3 * c;
      }
      return {d[2][1] - d[1][2], d[0][2] - d[2][0], dim_ == 3 ? d[1][0] - d[0][1] : 0.0};
   }

   void normalize(const MeshSpec& dom, double target)
   {
      const int n = 24;
      double vmax = 0.0;
      for (int k = 0; k < (dim_ == 3 ? n : 1); ++k)
      {
         for (int j = 0; j < n; ++j)
         {
            for (int i = 0; i < n; ++i)
            {
               Point x{dom.lower[0] + (i + 0.5) / n * (dom.upper[0] - dom.lower[0]),
                       dom.lower[1] + (j + 0.5) / n * (dom.upper[1] - dom.lower[1]),
                       dim_ == 3 ? dom.lower[2] + (k + 0.5) / n * (dom.upper[2] - dom.lower[2]) : 0.0};
               const Vec3 v = raw(x);
               vmax = std::max(vmax, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
            }
         }
      }
      scale_ = vmax > 0.0 ? target / vmax : 0.0;
   }

   Vec3 operator()(const Point& x) const
   {
      Vec3 v = raw(x);
      for (double& c : v) { c *= scale_; }
      return v;
   }

private:
   struct Mode
   {
      int component = 0;
      double amplitude = 0.0, k1 = 0.0, k2 = 0.0, k3 = 0.0, phase = 0.0;
   };
   int dim_;
   double h_;
   double scale_ = 1.0;
   std::vector<Mode> modes_;
};

} // namespace

CaseSpec lattice2d(double nu)
{
   if (!(nu > 0.0)) { throw std::invalid_argument("lattice2d: nu must be > 0"); }
   CaseSpec c;
   c.name = "lattice2d";
   c.nu = nu;
   c.domain = periodic_box(2, -1.0, 1.0);
   c.exact = lattice_field(nu, false);
   c.initial = [v = c.exact->velocity](double, const Point& x) { return v(0.0, x); };
   c.force = zero_vec;
   c.parameters = {{"nu", nu}};
   return c;
}

CaseSpec lattice3d(double nu)
{
   if (!(nu > 0.0)) { throw std::invalid_argument("lattice3d: nu must be > 0"); }
   CaseSpec c;
   c.name = "lattice3d";
   c.nu = nu;
   c.domain = periodic_box(3, 0.0, 1.0);
   c.exact = lattice_field(nu, true);
   c.formal_exact = true;
   c.initial = [v = c.exact->velocity](double, const Point& x) { return v(0.0, x); };
   c.force = zero_vec;
   c.parameters = {{"nu", nu}};
   return c;
}

CaseSpec tgv3d(double re)
{
   if (!(re > 0.0)) { throw std::invalid_argument("tgv3d: Re must be > 0"); }
   CaseSpec c;
   c.name = "tgv3d";
   c.nu = 1.0 / re;
   c.domain = periodic_box(3, 0.0, 2.0 * kPi);
   c.initial = [](double, const Point& x) -> Vec3 {
      return {std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]), -std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]),
              0.0};
   };
   c.force = zero_vec;
   c.parameters = {{"re", re}, {"U", 1.0}, {"L", 1.0}};
   return c;
}

CaseSpec channel(const ChannelOptions& opt)
{
   if (opt.dim < 2 || opt.dim > 3) { throw std::invalid_argument("channel: dim must be 2 or 3"); }
   if (!(opt.re_tau > 0.0) || !(opt.nu > 0.0) || !(opt.height > 0.0))
   {
      throw std::invalid_argument("channel: Re_tau, nu and H must be > 0");
   }
   const double h = opt.height;
   const double nu = opt.nu;
   const double force = opt.re_tau * opt.re_tau * nu * nu / (h * h * h);
   CaseSpec c;
   c.name = opt.laminar ? "channel_laminar" : "channel_turbulent";
   c.nu = nu;
   c.domain.dim = opt.dim;
   for (int a = 0; a < 3; ++a)
   {
      c.domain.bc[a] = AxisBc::Periodic;
      c.domain.lower[a] = 0.0;
      c.domain.upper[a] = a < opt.dim ? opt.extent[a] * h : 1.0;
   }
   c.domain.lower[1] = -h;
   c.domain.upper[1] = h;
   c.domain.bc[1] = AxisBc::Wall;
   if (opt.grading_gamma > 0.0) { c.domain.grading[1] = Grading::tanh_stretch(opt.grading_gamma); }
   c.force = [force](double, const Point&) -> Vec3 { return {force, 0.0, 0.0}; };
   c.zero_force = false;
   const double u_tau = std::sqrt(force * h);
   c.parameters = {{"re_tau", opt.re_tau}, {"nu", nu}, {"H", h}, {"F", force}, {"u_tau", u_tau},
                   {"gamma", opt.grading_gamma}};

   AnalyticField ex;
   ex.velocity = [=](double, const Point& x) -> Vec3 { return {force * (h * h - x[1] * x[1]) / (2.0 * nu), 0.0, 0.0}; };
   ex.gradient = [=](double, const Point& x) -> Mat3 {
      Mat3 g{};
      g[0][1] = -force * x[1] / nu;
      return g;
   };
   ex.laplacian = [=](double, const Point&) -> Vec3 { return {-force / nu, 0.0, 0.0}; };
   ex.time_derivative = zero_vec;
   ex.pressure = [](double, const Point&) { return 0.0; };
   ex.pressure_gradient = zero_vec;

   if (opt.laminar)
   {
      c.exact = ex;
      c.initial = ex.velocity;
      return c;
   }
   const double ub = opt.bulk_ratio * u_tau;
   c.parameters["bulk_velocity"] = ub;
   c.parameters["perturbation"] = opt.perturbation;
   c.parameters["seed"] = static_cast<double>(opt.seed);
   auto pert = std::make_shared<ChannelPerturbation>(opt, c.domain);
   pert->normalize(c.domain, opt.perturbation * ub);
   c.initial = [=](double, const Point& x) -> Vec3 {
      Vec3 v = (*pert)(x);
      v[0] += 1.5 * ub * (1.0 - x[1] * x[1] / (h * h));
      return v;
   };
   return c;
}

AnalyticField manufactured_field(const std::string& choice, double nu, bool extra_pressure)
{
   AnalyticField f;
   if (choice == "taylor_cells") { f = lattice_field(nu, false); }
   else if (choice == "lattice3d") { f = lattice_field(nu, true); }
   else { throw std::invalid_argument("unknown manufactured field '" + choice + "'"); }
   if (extra_pressure)
   {
      const double w = 2.0 * kPi;
      auto p0 = f.pressure;
      auto g0 = f.pressure_gradient;
      f.pressure = [=](double t, const Point& x) { return p0(t, x) + std::sin(w * x[0]); };
      f.pressure_gradient = [=](double t, const Point& x) {
         Vec3 g = g0(t, x);
         g[0] += w * std::cos(w * x[0]);
         return g;
      };
   }
   return f;
}

CaseSpec manufactured(double nu, const AnalyticField& field, const MeshSpec& domain, std::string name)
{
   if (!(nu > 0.0)) { throw std::invalid_argument("manufactured: nu must be > 0"); }
   // Divergence check at a deterministic set of interior points.
   std::mt19937_64 rng(12345);
   std::uniform_real_distribution<double> u01(0.0, 1.0);
   for (int i = 0; i < 64; ++i)
   {
      Point x{0.0, 0.0, 0.0};
      for (int a = 0; a < domain.dim; ++a) { x[a] = domain.lower[a] + u01(rng) * (domain.upper[a] - domain.lower[a]); }
      const double t = u01(rng);
      const Mat3 g = field.gradient(t, x);
      double div = 0.0, scale = 1.0;
      for (int a = 0; a < domain.dim; ++a)
      {
         div += g[a][a];
         for (int b = 0; b < domain.dim; ++b) { scale = std::max(scale, std::abs(g[a][b])); }
      }
      if (std::abs(div) > 1e-10 * scale)
      {
         throw std::invalid_argument("manufactured: velocity field is not divergence free");
      }
   }
   CaseSpec c;
   c.name = std::move(name);
   c.nu = nu;
   c.domain = domain;
   c.exact = field;
   c.initial = [v = field.velocity](double, const Point& x) { return v(0.0, x); };
   c.force = [field, nu](double t, const Point& x) -> Vec3 {
      const Vec3 u = field.velocity(t, x);
      const Vec3 dt = field.time_derivative(t, x);
      const Vec3 lap = field.laplacian(t, x);
      const Vec3 conv = convective(field.gradient(t, x), u);
      const Vec3 gp = field.pressure_gradient(t, x);
      Vec3 f{};
      for (int i = 0; i < 3; ++i) { f[i] = dt[i] - nu * lap[i] + conv[i] + gp[i]; }
      return f;
   };
   c.zero_force = false;
   c.steady_force = false;
   c.parameters = {{"nu", nu}};
   return c;
}

CaseSpec manufactured(double nu, const std::string& choice, bool extra_pressure)
{
   const MeshSpec dom = choice == "lattice3d" ? periodic_box(3, 0.0, 1.0) : periodic_box(2, -1.0, 1.0);
   CaseSpec c = manufactured(nu, manufactured_field(choice, nu, extra_pressure), dom);
   c.parameters["extra_pressure"] = extra_pressure ? 1.0 : 0.0;
   return c;
}

Vec3 pde_residual(const CaseSpec& c, double t, const Point& x)
{
   if (!c.exact) { throw std::invalid_argument("case '" + c.name + "' has no exact solution"); }
   const AnalyticField& e = *c.exact;
   const Vec3 u = e.velocity(t, x);
   const Vec3 dt = e.time_derivative(t, x);
   const Vec3 lap = e.laplacian(t, x);
   const Vec3 conv = convective(e.gradient(t, x), u);
   const Vec3 gp = e.pressure_gradient(t, x);
   const Vec3 f = c.force(t, x);
   Vec3 r{};
   for (int i = 0; i < 3; ++i) { r[i] = dt[i] - c.nu * lap[i] + conv[i] + gp[i] - f[i]; }
   return r;
}

std::shared_ptr<const CartesianMesh> make_case_mesh(const CaseSpec& c, const std::array<int, 3>& cells)
{
   MeshSpec m = c.domain;
   m.cells = cells;
   return build_cartesian_mesh(m);
}

CaseSpec make_case(const CaseParameters& p)
{
   if (p.name == "lattice2d") { return lattice2d(p.nu); }
   if (p.name == "lattice3d") { return lattice3d(p.nu); }
   if (p.name == "tgv3d") { return tgv3d(p.re); }
   if (p.name == "channel_laminar" || p.name == "channel_turbulent")
   {
      ChannelOptions o;
      o.dim = p.channel_dim;
      o.re_tau = p.re_tau;
      o.nu = p.nu;
      o.laminar = p.name == "channel_laminar";
      o.grading_gamma = p.grading_gamma;
      o.perturbation = p.perturbation;
      o.bulk_ratio = p.bulk_ratio;
      o.seed = p.seed;
      return channel(o);
   }
   if (p.name == "manufactured") { return manufactured(p.nu, p.field, p.extra_pressure); }
   throw std::invalid_argument("unknown case '" + p.name + "'");
}

} // namespace hdiv
