#include "config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "msalab/errors.hpp"

namespace msalab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == t.size() && !t.empty() && !std::isnan(x), key + ": expected a number, got '" + v + "'");
  return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == t.size() && !t.empty(), key + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  const auto x = to_int(key, v);
  require(x >= 0, key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ValidationError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v) {
  std::string t = trim(v);
  for (char& ch : t)
    if (ch == ',') ch = ' ';
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

template <class T, class Conv>
std::vector<T> to_list(const std::string& key, const std::string& v, Conv conv) {
  std::vector<T> out;
  for (const auto& w : split(v)) out.push_back(static_cast<T>(conv(key, w)));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"kernel.kind", [](RunConfig& c, auto&, auto& v) { c.kernel.kind = trim(v); }},
      {"kernel.gamma", [](RunConfig& c, auto& k, auto& v) { c.kernel.gamma = to_double(k, v); }},
      {"kernel.rho", [](RunConfig& c, auto& k, auto& v) { c.kernel.rho = to_double(k, v); }},
      {"kernel.s", [](RunConfig& c, auto& k, auto& v) { c.kernel.s = to_double(k, v); }},
      {"kernel.scale", [](RunConfig& c, auto& k, auto& v) { c.kernel.scale = to_double(k, v); }},
      {"kernel.table", [](RunConfig& c, auto&, auto& v) { c.kernel.table = trim(v); }},
      {"kernel.phase", [](RunConfig& c, auto& k, auto& v) { c.kernel.phase = to_list<double>(k, v, to_double); }},

      {"disorder.kind", [](RunConfig& c, auto&, auto& v) { c.disorder.kind = trim(v); }},
      {"disorder.M", [](RunConfig& c, auto& k, auto& v) { c.disorder.M = to_double(k, v); }},
      {"disorder.lambda", [](RunConfig& c, auto& k, auto& v) { c.disorder.lambda = to_double(k, v); }},
      {"disorder.beta", [](RunConfig& c, auto& k, auto& v) { c.disorder.beta = to_double(k, v); }},
      {"disorder.beta0", [](RunConfig& c, auto& k, auto& v) { c.disorder.beta0 = to_double(k, v); }},
      {"disorder.atom_lo", [](RunConfig& c, auto& k, auto& v) { c.disorder.atom_lo = to_double(k, v); }},
      {"disorder.atom_hi", [](RunConfig& c, auto& k, auto& v) { c.disorder.atom_hi = to_double(k, v); }},
      {"disorder.prob", [](RunConfig& c, auto& k, auto& v) { c.disorder.prob = to_double(k, v); }},
      {"disorder.quantiles",
       [](RunConfig& c, auto& k, auto& v) { c.disorder.quantiles = to_list<double>(k, v, to_double); }},

      {"model.d", [](RunConfig& c, auto& k, auto& v) { c.d = static_cast<int>(to_int(k, v)); }},
      {"model.epsilon", [](RunConfig& c, auto& k, auto& v) { c.epsilon = to_double(k, v); }},

      {"geometry.L", [](RunConfig& c, auto& k, auto& v) { c.L = to_int(k, v); }},
      {"geometry.l", [](RunConfig& c, auto& k, auto& v) { c.l = to_int(k, v); }},
      {"geometry.alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = to_double(k, v); }},
      {"geometry.scales",
       [](RunConfig& c, auto& k, auto& v) { c.scales = to_list<std::int64_t>(k, v, to_int); }},

      {"msa.p", [](RunConfig& c, auto& k, auto& v) { c.p = to_double(k, v); }},
      {"msa.gamma", [](RunConfig& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"msa.rho", [](RunConfig& c, auto& k, auto& v) { c.rho = to_double(k, v); }},
      {"msa.rho_prime", [](RunConfig& c, auto& k, auto& v) { c.rho_prime = to_double(k, v); }},
      {"msa.kappa0", [](RunConfig& c, auto& k, auto& v) { c.kappa0 = to_double(k, v); }},
      {"msa.kappa_inf", [](RunConfig& c, auto& k, auto& v) { c.kappa_inf = to_double(k, v); }},
      {"msa.kappa", [](RunConfig& c, auto& k, auto& v) { c.kappa = to_double(k, v); }},
      {"msa.E", [](RunConfig& c, auto& k, auto& v) { c.E = to_double(k, v); }},
      {"msa.E_lo", [](RunConfig& c, auto& k, auto& v) { c.e_lo = to_double(k, v); }},
      {"msa.E_hi", [](RunConfig& c, auto& k, auto& v) { c.e_hi = to_double(k, v); }},
      {"msa.grid_points", [](RunConfig& c, auto& k, auto& v) { c.grid_points = static_cast<int>(to_int(k, v)); }},
      {"msa.constant", [](RunConfig& c, auto&, auto& v) { c.constant = trim(v); }},
      {"msa.horizon", [](RunConfig& c, auto& k, auto& v) { c.horizon = static_cast<int>(to_int(k, v)); }},
      {"msa.logL0", [](RunConfig& c, auto& k, auto& v) { c.logL0 = to_double(k, v); }},
      {"msa.same_seed", [](RunConfig& c, auto& k, auto& v) { c.same_seed = to_bool(k, v); }},

      {"wegner.windows", [](RunConfig& c, auto& k, auto& v) { c.windows = to_list<double>(k, v, to_double); }},
      {"wegner.bound_target", [](RunConfig& c, auto& k, auto& v) { c.bound_target = to_double(k, v); }},

      {"quasi_metric.rho", [](RunConfig& c, auto& k, auto& v) { c.qm_rho = to_double(k, v); }},
      {"quasi_metric.n_max", [](RunConfig& c, auto& k, auto& v) { c.qm_n_max = to_int(k, v); }},
      {"quasi_metric.samples", [](RunConfig& c, auto& k, auto& v) { c.qm_samples = to_uint(k, v); }},

      {"cover.d", [](RunConfig& c, auto& k, auto& v) { c.cover_d = static_cast<int>(to_int(k, v)); }},
      {"cover.l", [](RunConfig& c, auto& k, auto& v) { c.cover_l = to_int(k, v); }},
      {"cover.L", [](RunConfig& c, auto& k, auto& v) { c.cover_L = to_int(k, v); }},

      {"decay.side", [](RunConfig& c, auto& k, auto& v) { c.side = to_int(k, v); }},
      {"decay.seeds", [](RunConfig& c, auto& k, auto& v) { c.n_seeds = to_uint(k, v); }},
      {"decay.seed_list",
       [](RunConfig& c, auto& k, auto& v) { c.seed_list = to_list<std::uint64_t>(k, v, to_uint); }},
      {"decay.edge_fraction", [](RunConfig& c, auto& k, auto& v) { c.edge_fraction = to_double(k, v); }},
      {"decay.floor", [](RunConfig& c, auto& k, auto& v) { c.floor = to_double(k, v); }},
      {"decay.family", [](RunConfig& c, auto&, auto& v) { c.family = trim(v); }},
      {"decay.rho_hint", [](RunConfig& c, auto& k, auto& v) {
         const auto t = trim(v);
         if (t.empty() || t == "none") c.rho_hint.reset();
         else c.rho_hint = to_double(k, t);
       }},
      {"decay.E_lo", [](RunConfig& c, auto& k, auto& v) { c.window_lo = to_double(k, v); }},
      {"decay.E_hi", [](RunConfig& c, auto& k, auto& v) { c.window_hi = to_double(k, v); }},
      {"decay.keep_profiles", [](RunConfig& c, auto& k, auto& v) { c.keep_profiles = to_bool(k, v); }},

      {"execution.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"execution.first_trial", [](RunConfig& c, auto& k, auto& v) { c.first_trial = to_uint(k, v); }},
      {"execution.trials", [](RunConfig& c, auto& k, auto& v) { c.trials = to_uint(k, v); }},
      {"execution.workers", [](RunConfig& c, auto& k, auto& v) {
         const auto w = to_uint(k, v);
         require(w >= 1, "execution.workers must be >= 1");
         c.workers = static_cast<unsigned>(w);
       }},
      {"execution.out", [](RunConfig& c, auto&, auto& v) { c.out = trim(v); }},
  };
  return table;
}

void set_value(RunConfig& cfg, const std::string& dotted, const std::string& value) {
  const auto it = setters().find(dotted);
  require(it != setters().end(), "unknown configuration key '" + dotted + "'");
  it->second(cfg, dotted, value);
}

}  // namespace

void load_ini(RunConfig& cfg, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("cannot read config '" + path + "': " + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    require(body.data().empty(), "config key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) set_value(cfg, section + "." + key, value.data());
  }
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, "override '" + assignment + "' must look like section.key=value");
  set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<std::pair<Site, Complex>> parse_table(const std::string& text, int d) {
  std::vector<std::pair<Site, Complex>> entries;
  std::istringstream is(text);
  for (std::string tok; is >> tok;) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ps(tok);
    while (std::getline(ps, part, ':')) parts.push_back(part);
    require(parts.size() == 2 || parts.size() == 3, "table entry '" + tok + "' must be disp:re[:im]");
    std::vector<std::int64_t> coords;
    std::istringstream cs(parts[0]);
    for (std::string c; std::getline(cs, c, ',');) coords.push_back(to_int("kernel.table", c));
    require(static_cast<int>(coords.size()) == d, "table displacement '" + parts[0] + "' must have d components");
    Site x(d);
    for (int k = 0; k < d; ++k) x[k] = coords[static_cast<std::size_t>(k)];
    const double re = to_double("kernel.table", parts[1]);
    const double im = parts.size() == 3 ? to_double("kernel.table", parts[2]) : 0.0;
    entries.emplace_back(x, Complex(re, im));
  }
  return entries;
}

HoppingKernel RunConfig::make_kernel() const {
  require(d >= 1 && d <= kMaxDim, "model.d must lie in [1, 3]");
  HoppingKernel k = [&] {
    if (kernel.kind == "log_power") return HoppingKernel::log_power(kernel.gamma, kernel.rho, kernel.scale);
    if (kernel.kind == "stretched") return HoppingKernel::stretched(kernel.s, kernel.scale);
    if (kernel.kind == "table") return HoppingKernel::table(d, parse_table(kernel.table, d)).scaled(kernel.scale);
    throw ValidationError("kernel.kind must be log_power, stretched or table, got '" + kernel.kind + "'");
  }();
  if (!kernel.phase.empty()) {
    require(static_cast<int>(kernel.phase.size()) == d, "kernel.phase must have d components");
    k = k.with_phase(kernel.phase);
  }
  return k;
}

DisorderSpec RunConfig::make_disorder() const {
  DisorderSpec s;
  if (disorder.kind == "uniform") s.kind = DisorderSpec::Kind::Uniform;
  else if (disorder.kind == "power") s.kind = DisorderSpec::Kind::Power;
  else if (disorder.kind == "bernoulli") s.kind = DisorderSpec::Kind::Bernoulli;
  else if (disorder.kind == "quantile_table") s.kind = DisorderSpec::Kind::QuantileTable;
  else throw ValidationError("disorder.kind must be uniform, power, bernoulli or quantile_table");
  s.M = disorder.M;
  s.lambda = disorder.lambda;
  s.beta = disorder.beta;
  s.beta0 = disorder.beta0;
  s.atom_lo = disorder.atom_lo;
  s.atom_hi = disorder.atom_hi;
  s.prob = disorder.prob;
  s.quantiles = disorder.quantiles;
  s.validate();
  return s;
}

ModelParams RunConfig::model() const {
  ModelParams m;
  m.d = d;
  m.kernel = make_kernel();
  m.disorder = make_disorder();
  m.epsilon = epsilon;
  m.validate();
  return m;
}

WeightParams RunConfig::weights() const {
  WeightParams w{gamma, rho, rho_prime};
  w.validate();
  return w;
}

MSAParams RunConfig::msa() const {
  MSAParams m;
  m.alpha = alpha;
  m.p = p;
  m.d = d;
  m.weights = weights();
  m.kappa0 = kappa0;
  m.kappa_inf = kappa_inf;
  if (constant == "two_pow_rho") m.constant = KappaConstant::TwoPowRho;
  else if (constant == "alpha_pow_rho_prime") m.constant = KappaConstant::AlphaPowRhoPrime;
  else throw ValidationError("msa.constant must be two_pow_rho or alpha_pow_rho_prime");
  m.validate();
  return m;
}

TrialPlan RunConfig::plan() const { return TrialPlan{seed, first_trial, trials, workers}; }

std::vector<std::uint64_t> RunConfig::ensemble_seeds() const {
  if (!seed_list.empty()) return seed_list;
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 0; k < n_seeds; ++k) s.push_back(seed + k);
  return s;
}

YeungOonoConfig RunConfig::ensemble() const {
  YeungOonoConfig y;
  y.d = d;
  y.side = side;
  y.kernel = make_kernel();
  y.disorder = make_disorder();
  y.epsilon = epsilon;
  y.seeds = ensemble_seeds();
  y.e_lo = window_lo;
  y.e_hi = window_hi;
  y.edge_fraction = edge_fraction;
  if (family == "log_power") y.fit.family = DecayFamily::LogPower;
  else if (family == "stretched") y.fit.family = DecayFamily::Stretched;
  else throw ValidationError("decay.family must be log_power or stretched");
  y.fit.floor = floor;
  y.fit.rho_hint = rho_hint;
  y.keep_profiles = keep_profiles;
  y.gamma = kernel.kind == "log_power" ? kernel.gamma : gamma;
  y.rho = kernel.kind == "log_power" ? kernel.rho : rho;
  y.kappa_inf = kappa_inf;
  y.alpha = alpha;
  y.workers = workers;
  y.validate();
  return y;
}

nlohmann::json RunConfig::canonical() const {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : "-inf";
  };
  nlohmann::json j;
  j["kernel"] = {{"kind", kernel.kind}, {"gamma", kernel.gamma}, {"rho", kernel.rho}, {"s", kernel.s},
                 {"scale", kernel.scale}, {"table", kernel.table}, {"phase", kernel.phase}};
  j["disorder"] = {{"kind", disorder.kind},       {"M", disorder.M},         {"lambda", disorder.lambda},
                   {"beta", disorder.beta},       {"beta0", disorder.beta0}, {"atom_lo", disorder.atom_lo},
                   {"atom_hi", disorder.atom_hi}, {"prob", disorder.prob},   {"quantiles", disorder.quantiles}};
  j["model"] = {{"d", d}, {"epsilon", epsilon}};
  j["geometry"] = {{"L", L}, {"l", l}, {"alpha", alpha}, {"scales", scales}};
  j["msa"] = {{"p", p},
              {"gamma", gamma},
              {"rho", rho},
              {"rho_prime", rho_prime},
              {"kappa0", kappa0},
              {"kappa_inf", kappa_inf},
              {"kappa", kappa},
              {"E", E},
              {"E_lo", e_lo},
              {"E_hi", e_hi},
              {"grid_points", grid_points},
              {"constant", constant},
              {"horizon", horizon},
              {"logL0", logL0 ? nlohmann::json(*logL0) : nlohmann::json()},
              {"same_seed", same_seed}};
  j["wegner"] = {{"windows", windows}, {"bound_target", bound_target}};
  j["quasi_metric"] = {{"rho", qm_rho}, {"n_max", qm_n_max}, {"samples", qm_samples}};
  j["cover"] = {{"d", cover_d}, {"l", cover_l}, {"L", cover_L}};
  j["decay"] = {{"side", side},
                {"seeds", ensemble_seeds()},
                {"edge_fraction", edge_fraction},
                {"floor", floor},
                {"family", family},
                {"rho_hint", rho_hint ? nlohmann::json(*rho_hint) : nlohmann::json()},
                {"E_lo", num(window_lo)},
                {"E_hi", num(window_hi)},
                {"keep_profiles", keep_profiles}};
  j["execution"] = {{"seed", seed}, {"first_trial", first_trial}, {"trials", trials}};
  return j;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(canonical().dump());
  return os.str();
}

}  // namespace msalab::cli
