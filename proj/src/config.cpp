#include "hdiv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace hdiv {

namespace {

std::string make_message(const std::string& field, int line, const std::string& message)
{
   std::string s = "config";
   if (line > 0) { s += " line " + std::to_string(line); }
   if (!field.empty()) { s += (line > 0 ? ", " : " ") + std::string("field '") + field + "'"; }
   return s + ": " + message;
}

std::string trim(const std::string& s)
{
   const auto b = s.find_first_not_of(" \t\r\n");
   if (b == std::string::npos) { return ""; }
   const auto e = s.find_last_not_of(" \t\r\n");
   return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
   std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
   return s;
}

// Value parsers throw std::invalid_argument with a short description.
double to_double(const std::string& v)
{
   double x = 0.0;
   const char* end = v.data() + v.size();
   auto [p, ec] = std::from_chars(v.data(), end, x);
   if (ec != std::errc() || p != end || v.empty()) { throw std::invalid_argument("expected a number, got '" + v + "'"); }
   return x;
}

long long to_integer(const std::string& v)
{
   long long x = 0;
   const char* end = v.data() + v.size();
   auto [p, ec] = std::from_chars(v.data(), end, x);
   if (ec != std::errc() || p != end || v.empty()) { throw std::invalid_argument("expected an integer, got '" + v + "'"); }
   return x;
}

int to_int(const std::string& v)
{
   const long long x = to_integer(v);
   if (x < -2147483647LL || x > 2147483647LL) { throw std::invalid_argument("integer out of range: '" + v + "'"); }
   return static_cast<int>(x);
}

bool to_bool(const std::string& v)
{
   const std::string l = lower(v);
   if (l == "true" || l == "1" || l == "yes" || l == "on") { return true; }
   if (l == "false" || l == "0" || l == "no" || l == "off") { return false; }
   throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::string unquote(const std::string& v)
{
   if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
   {
      return v.substr(1, v.size() - 2);
   }
   return v;
}

const std::set<std::string>& case_names()
{
   static const std::set<std::string> names{"lattice2d", "lattice3d", "tgv3d", "channel_laminar",
                                            "channel_turbulent", "manufactured"};
   return names;
}

struct Key
{
   std::function<void(RunConfig&, const std::string&)> set;
   std::function<std::optional<std::string>(const RunConfig&)> get;
};

using KeyTable = std::vector<std::pair<std::string, Key>>;

const KeyTable& keys()
{
   static const KeyTable table = [] {
      KeyTable t;
      auto add = [&t](std::string name, Key k) { t.emplace_back(std::move(name), std::move(k)); };
      auto num = [](double v) { return std::optional<std::string>(format_double(v)); };
      auto integer = [](long long v) { return std::optional<std::string>(std::to_string(v)); };

      add("case", {[](RunConfig& c, const std::string& v) {
                      const std::string n = unquote(v);
                      if (!case_names().count(n)) { throw std::invalid_argument("unknown case '" + n + "'"); }
                      c.case_params.name = n;
                   },
                   [](const RunConfig& c) { return std::optional<std::string>(c.case_params.name); }});
      add("nu", {[](RunConfig& c, const std::string& v) {
                    c.case_params.nu = to_double(v);
                    c.nu_given = true;
                 },
                 [num](const RunConfig& c) {
                    return c.nu_given ? num(c.case_params.nu) : std::optional<std::string>();
                 }});
      add("re", {[](RunConfig& c, const std::string& v) { c.case_params.re = to_double(v); },
                 [num](const RunConfig& c) { return num(c.case_params.re); }});
      add("re_tau", {[](RunConfig& c, const std::string& v) { c.case_params.re_tau = to_double(v); },
                     [num](const RunConfig& c) { return num(c.case_params.re_tau); }});
      add("channel_dim", {[](RunConfig& c, const std::string& v) { c.case_params.channel_dim = to_int(v); },
                          [integer](const RunConfig& c) { return integer(c.case_params.channel_dim); }});
      add("grading_gamma", {[](RunConfig& c, const std::string& v) { c.case_params.grading_gamma = to_double(v); },
                            [num](const RunConfig& c) { return num(c.case_params.grading_gamma); }});
      add("perturbation", {[](RunConfig& c, const std::string& v) { c.case_params.perturbation = to_double(v); },
                           [num](const RunConfig& c) { return num(c.case_params.perturbation); }});
      add("bulk_ratio", {[](RunConfig& c, const std::string& v) { c.case_params.bulk_ratio = to_double(v); },
                         [num](const RunConfig& c) { return num(c.case_params.bulk_ratio); }});
      add("field", {[](RunConfig& c, const std::string& v) { c.case_params.field = unquote(v); },
                    [](const RunConfig& c) { return std::optional<std::string>(c.case_params.field); }});
      add("extra_pressure",
          {[](RunConfig& c, const std::string& v) { c.case_params.extra_pressure = to_bool(v); },
           [](const RunConfig& c) { return std::optional<std::string>(c.case_params.extra_pressure ? "true" : "false"); }});
      add("seed", {[](RunConfig& c, const std::string& v) {
                      std::uint64_t x = 0;
                      const char* end = v.data() + v.size();
                      auto [p, ec] = std::from_chars(v.data(), end, x);
                      if (ec != std::errc() || p != end || v.empty())
                      {
                         throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
                      }
                      c.case_params.seed = x;
                   },
                   [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.case_params.seed)); }});
      add("k", {[](RunConfig& c, const std::string& v) { c.k = to_int(v); },
                [integer](const RunConfig& c) { return integer(c.k); }});
      add("N", {[](RunConfig& c, const std::string& v) {
                   const int n = to_int(v);
                   c.cells = {n, n, n};
                },
                [](const RunConfig&) { return std::optional<std::string>(); }});
      add("cells", {[](RunConfig& c, const std::string& v) {
                       std::vector<int> n;
                       std::stringstream ss(unquote(v));
                       std::string item;
                       while (std::getline(ss, item, ',')) { n.push_back(to_int(trim(item))); }
                       if (n.empty() || n.size() > 3) { throw std::invalid_argument("expected 1 to 3 cell counts"); }
                       while (n.size() < 3) { n.push_back(n.back()); }
                       c.cells = {n[0], n[1], n[2]};
                    },
                    [](const RunConfig& c) {
                       return std::optional<std::string>(std::to_string(c.cells[0]) + "," + std::to_string(c.cells[1]) +
                                                         "," + std::to_string(c.cells[2]));
                    }});
      add("sigma", {[](RunConfig& c, const std::string& v) { c.sigma = to_double(v); },
                    [num](const RunConfig& c) { return c.sigma ? num(*c.sigma) : std::optional<std::string>(); }});
      add("scheme", {[](RunConfig& c, const std::string& v) { c.scheme = parse_scheme(unquote(v)); },
                     [](const RunConfig& c) { return std::optional<std::string>(scheme_name(c.scheme)); }});
      add("dt", {[](RunConfig& c, const std::string& v) { c.dt = to_double(v); },
                 [num](const RunConfig& c) { return num(c.dt); }});
      add("t_end", {[](RunConfig& c, const std::string& v) { c.t_end = to_double(v); },
                    [num](const RunConfig& c) { return num(c.t_end); }});
      add("record_every", {[](RunConfig& c, const std::string& v) { c.record_every = to_int(v); },
                           [integer](const RunConfig& c) { return integer(c.record_every); }});
      add("snapshot_every", {[](RunConfig& c, const std::string& v) { c.snapshot_every = to_int(v); },
                             [integer](const RunConfig& c) { return integer(c.snapshot_every); }});
      add("snapshot_samples", {[](RunConfig& c, const std::string& v) { c.snapshot_samples = to_int(v); },
                               [integer](const RunConfig& c) { return integer(c.snapshot_samples); }});
      add("spectrum_every", {[](RunConfig& c, const std::string& v) { c.spectrum_every = to_int(v); },
                             [integer](const RunConfig& c) { return integer(c.spectrum_every); }});
      add("spectrum_samples", {[](RunConfig& c, const std::string& v) { c.spectrum_samples = to_int(v); },
                               [integer](const RunConfig& c) { return integer(c.spectrum_samples); }});
      add("output", {[](RunConfig& c, const std::string& v) { c.output = unquote(v); },
                     [](const RunConfig& c) { return std::optional<std::string>(c.output); }});
      add("div_tol", {[](RunConfig& c, const std::string& v) { c.div_tol = to_double(v); },
                      [num](const RunConfig& c) { return num(c.div_tol); }});
      add("linear_tol", {[](RunConfig& c, const std::string& v) { c.linear_tol = to_double(v); },
                         [num](const RunConfig& c) { return num(c.linear_tol); }});
      add("gauge", {[](RunConfig& c, const std::string& v) { c.gauge = parse_gauge(unquote(v)); },
                    [](const RunConfig& c) { return std::optional<std::string>(gauge_name(c.gauge)); }});
      add("solver", {[](RunConfig& c, const std::string& v) { c.solver = parse_solver_kind(unquote(v)); },
                     [](const RunConfig& c) { return std::optional<std::string>(solver_kind_name(c.solver)); }});
      add("solver_tol", {[](RunConfig& c, const std::string& v) { c.solver_tol = to_double(v); },
                         [num](const RunConfig& c) { return num(c.solver_tol); }});
      add("lu_reuse", {[](RunConfig& c, const std::string& v) { c.lu_reuse = to_int(v); },
                       [integer](const RunConfig& c) { return integer(c.lu_reuse); }});
      return t;
   }();
   return table;
}

const Key* find_key(const std::string& name)
{
   for (const auto& [n, k] : keys())
   {
      if (n == name) { return &k; }
   }
   return nullptr;
}

struct Entry
{
   std::string key;
   std::string value;
   int line = 0;
};

int line_of(const std::string& text, std::size_t pos)
{
   return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string strip_comments(const std::string& text)
{
   std::string out;
   out.reserve(text.size());
   bool in_comment = false;
   for (char ch : text)
   {
      if (ch == '\n') { in_comment = false; }
      else if (ch == '#') { in_comment = true; }
      if (!in_comment) { out.push_back(ch); }
      else { out.push_back(' '); }
   }
   return out;
}

std::vector<Entry> tokenize(const std::string& raw)
{
   const std::string text = strip_comments(raw);
   std::vector<Entry> entries;
   const auto open = text.find_first_not_of(" \t\r\n");
   if (open != std::string::npos && text[open] == '{')
   {
      const auto close = text.rfind('}');
      if (close == std::string::npos || close < open)
      {
         throw ConfigError("", line_of(text, open), "unterminated '{'");
      }
      if (!trim(text.substr(close + 1)).empty())
      {
         throw ConfigError("", line_of(text, close), "unexpected text after '}'");
      }
      // Keys are identifiers followed by '='; a value runs up to the next key.
      static const std::regex key_re(R"(([A-Za-z_][A-Za-z0-9_]*)\s*=)");
      const std::string body = text.substr(open + 1, close - open - 1);
      std::vector<std::pair<std::size_t, std::smatch>> found;
      for (auto it = std::sregex_iterator(body.begin(), body.end(), key_re); it != std::sregex_iterator(); ++it)
      {
         // A key must start the body or follow a comma.
         const std::size_t pos = static_cast<std::size_t>(it->position(0));
         const std::string before = trim(body.substr(0, pos));
         if (!before.empty() && before.back() != ',') { continue; }
         found.emplace_back(pos, *it);
      }
      if (found.empty() && !trim(body).empty())
      {
         throw ConfigError("", line_of(text, open), "expected key=value entries inside braces");
      }
      if (!found.empty() && !trim(body.substr(0, found[0].first)).empty())
      {
         throw ConfigError("", line_of(text, open), "unexpected text before the first key");
      }
      for (std::size_t i = 0; i < found.size(); ++i)
      {
         const std::size_t vstart = found[i].first + static_cast<std::size_t>(found[i].second.length(0));
         const std::size_t vend = i + 1 < found.size() ? found[i + 1].first : body.size();
         std::string value = trim(body.substr(vstart, vend - vstart));
         if (i + 1 < found.size())
         {
            if (value.empty() || value.back() != ',')
            {
               throw ConfigError(found[i].second[1], line_of(text, open + 1 + found[i].first),
                                 "entries must be separated by ','");
            }
            value = trim(value.substr(0, value.size() - 1));
         }
         else if (!value.empty() && value.back() == ',') { value = trim(value.substr(0, value.size() - 1)); }
         entries.push_back({found[i].second[1], value, line_of(text, open + 1 + found[i].first)});
      }
      return entries;
   }

   std::stringstream ss(text);
   std::string line;
   int number = 0;
   while (std::getline(ss, line))
   {
      ++number;
      const std::string t = trim(line);
      if (t.empty()) { continue; }
      const auto eq = t.find('=');
      if (eq == std::string::npos) { throw ConfigError("", number, "expected 'key = value'"); }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) { throw ConfigError("", number, "missing key before '='"); }
      entries.push_back({key, trim(t.substr(eq + 1)), number});
   }
   return entries;
}

void validate_with_lines(const RunConfig& c, const std::map<std::string, int>& lines)
{
   auto fail = [&lines](const std::string& field, const std::string& msg) {
      auto it = lines.find(field);
      if (it == lines.end() && field == "cells") { it = lines.find("N"); }
      throw ConfigError(field, it != lines.end() ? it->second : 0, msg);
   };
   const CaseParameters& p = c.case_params;
   if (!case_names().count(p.name)) { fail("case", "unknown case '" + p.name + "'"); }
   if (c.k < 1 || c.k > 12) { fail("k", "must be between 1 and 12"); }
   for (int a = 0; a < 3; ++a)
   {
      if (c.cells[a] < 1) { fail("cells", "cell counts must be >= 1"); }
   }
   if (c.nu_given && !(p.nu > 0.0 && std::isfinite(p.nu))) { fail("nu", "must be > 0"); }
   if ((p.name == "lattice2d" || p.name == "lattice3d" || p.name == "manufactured") && !c.nu_given)
   {
      fail("nu", "missing required field for case " + p.name);
   }
   if (!(p.re > 0.0)) { fail("re", "must be > 0"); }
   if (!(p.re_tau > 0.0)) { fail("re_tau", "must be > 0"); }
   if (p.channel_dim != 2 && p.channel_dim != 3) { fail("channel_dim", "must be 2 or 3"); }
   if (!(p.perturbation >= 0.0)) { fail("perturbation", "must be >= 0"); }
   if (!(p.bulk_ratio > 0.0)) { fail("bulk_ratio", "must be > 0"); }
   if (p.field != "taylor_cells" && p.field != "lattice3d") { fail("field", "expected taylor_cells or lattice3d"); }
   if (c.sigma && !(*c.sigma > 0.0)) { fail("sigma", "must be > 0"); }
   if (!(c.dt > 0.0) || !std::isfinite(c.dt)) { fail("dt", "must be > 0"); }
   if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) { fail("t_end", "must be >= 0"); }
   if (c.record_every < 1) { fail("record_every", "must be >= 1"); }
   if (c.snapshot_every < 0) { fail("snapshot_every", "must be >= 0"); }
   if (c.snapshot_samples < 0) { fail("snapshot_samples", "must be >= 0"); }
   if (c.spectrum_every < 0) { fail("spectrum_every", "must be >= 0"); }
   if (c.spectrum_samples < 0) { fail("spectrum_samples", "must be >= 0"); }
   if (c.output.empty()) { fail("output", "must not be empty"); }
   if (!(c.div_tol > 0.0)) { fail("div_tol", "must be > 0"); }
   if (!(c.linear_tol > 0.0)) { fail("linear_tol", "must be > 0"); }
   if (!(c.solver_tol > 0.0)) { fail("solver_tol", "must be > 0"); }
   if (c.lu_reuse < 0) { fail("lu_reuse", "must be >= 0"); }
   if (c.gauge == GaugeMode::None) { fail("gauge", "a pressure gauge (mean-zero or pinned) is required"); }
}

} // namespace

ConfigError::ConfigError(const std::string& field, int line, const std::string& message)
   : std::runtime_error(make_message(field, line, message)), field_(field), line_(line)
{
}

std::string format_double(double v)
{
   char buf[40];
   std::snprintf(buf, sizeof(buf), "%.17g", v);
   return buf;
}

double RunConfig::effective_nu() const
{
   const std::string& n = case_params.name;
   if (n == "tgv3d") { return 1.0 / case_params.re; }
   if (!nu_given && (n == "channel_laminar" || n == "channel_turbulent")) { return 1.0 / case_params.re_tau; }
   return case_params.nu;
}

SchemeConfig RunConfig::scheme_config() const
{
   SchemeConfig s;
   s.scheme = scheme;
   s.dt = dt;
   s.t_end = t_end;
   s.div_tol = div_tol;
   s.linear_tol = linear_tol;
   s.gauge = gauge;
   s.solver.kind = solver;
   s.solver.tolerance = solver_tol;
   s.solver.lu_reuse = lu_reuse;
   return s;
}

RunConfig parse_config(const std::string& text)
{
   RunConfig cfg;
   std::map<std::string, int> lines;
   for (const Entry& e : tokenize(text))
   {
      const Key* key = find_key(e.key);
      if (key == nullptr) { throw ConfigError(e.key, e.line, "unknown key"); }
      if (lines.count(e.key)) { throw ConfigError(e.key, e.line, "duplicate key"); }
      if (e.value.empty()) { throw ConfigError(e.key, e.line, "missing value"); }
      try
      {
         key->set(cfg, e.value);
      }
      catch (const std::invalid_argument& ex)
      {
         throw ConfigError(e.key, e.line, ex.what());
      }
      lines[e.key] = e.line;
   }
   if (lines.count("N") && lines.count("cells")) { throw ConfigError("cells", lines["cells"], "give either N or cells"); }
   for (const char* req : {"case", "k", "dt", "t_end"})
   {
      if (!lines.count(req)) { throw ConfigError(req, 0, "missing required field"); }
   }
   if (!lines.count("N") && !lines.count("cells")) { throw ConfigError("N", 0, "missing required field"); }
   if (cfg.case_params.name == "channel_laminar" || cfg.case_params.name == "channel_turbulent")
   {
      if (!lines.count("nu")) { cfg.case_params.nu = 1.0 / cfg.case_params.re_tau; }
   }
   validate_with_lines(cfg, lines);
   return cfg;
}

RunConfig load_config(const std::string& path)
{
   std::ifstream in(path);
   if (!in) { throw std::runtime_error("cannot open config file '" + path + "'"); }
   std::stringstream ss;
   ss << in.rdbuf();
   return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment)
{
   const auto eq = assignment.find('=');
   if (eq == std::string::npos) { throw ConfigError("", 0, "override '" + assignment + "' is not key=value"); }
   const std::string key = trim(assignment.substr(0, eq));
   const std::string value = trim(assignment.substr(eq + 1));
   const Key* k = find_key(key);
   if (k == nullptr) { throw ConfigError(key, 0, "unknown key"); }
   try
   {
      k->set(cfg, value);
   }
   catch (const std::invalid_argument& ex)
   {
      throw ConfigError(key, 0, ex.what());
   }
   validate_with_lines(cfg, {});
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg)
{
   std::vector<std::pair<std::string, std::string>> out;
   for (const auto& [name, key] : keys())
   {
      if (auto v = key.get(cfg)) { out.emplace_back(name, *v); }
   }
   return out;
}

std::string config_to_text(const RunConfig& cfg)
{
   std::string s;
   for (const auto& [k, v] : config_entries(cfg)) { s += k + " = " + v + "\n"; }
   return s;
}

void validate_config(const RunConfig& cfg) { validate_with_lines(cfg, {}); }

int config_dim(const RunConfig& cfg)
{
   const std::string& n = cfg.case_params.name;
   if (n == "lattice2d") { return 2; }
   if (n == "manufactured") { return cfg.case_params.field == "lattice3d" ? 3 : 2; }
   if (n == "channel_laminar" || n == "channel_turbulent") { return cfg.case_params.channel_dim; }
   return 3;
}

} // namespace hdiv
