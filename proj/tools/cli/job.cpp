#include "job.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "modcas/error.hpp"

namespace modcas::cli {

namespace {

std::string join(const std::string& path, std::string_view key)
{
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void type_error(const toml::node& n, const std::string& field, const char* expected)
{
  std::ostringstream os;
  os << "line " << n.source().begin.line << ": field '" << field << "' must be " << expected;
  throw Error(ErrorCode::ParseError, os.str());
}

template <class T>
T convert(const toml::node& n, const std::string& field);

template <>
double convert<double>(const toml::node& n, const std::string& field)
{
  if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer()))
    return *v;
  type_error(n, field, "a number");
}

template <>
int convert<int>(const toml::node& n, const std::string& field)
{
  if (auto v = n.value<int64_t>(); v && n.is_integer())
    return static_cast<int>(*v);
  type_error(n, field, "an integer");
}

template <>
bool convert<bool>(const toml::node& n, const std::string& field)
{
  if (auto v = n.value<bool>(); v && n.is_boolean())
    return *v;
  type_error(n, field, "true or false");
}

template <>
std::string convert<std::string>(const toml::node& n, const std::string& field)
{
  if (auto v = n.value<std::string>(); v && n.is_string())
    return *v;
  type_error(n, field, "a string");
}

// One TOML table with its dotted path; remembers which keys were read so the
// leftovers can be reported as unknown.
class Section {
public:
  Section(const toml::table* t, std::string path, JobConfig& cfg, std::vector<std::string>& problems)
    : t_(t), path_(std::move(path)), cfg_(cfg), problems_(problems)
  {
  }

  bool present() const { return t_ != nullptr; }
  const std::string& path() const { return path_; }

  const toml::node* node(std::string_view key)
  {
    used_.insert(std::string(key));
    return t_ ? t_->get(key) : nullptr;
  }

  template <class T>
  std::optional<T> optional(std::string_view key)
  {
    const auto* n = node(key);
    if (!n)
      return std::nullopt;
    return convert<T>(*n, join(path_, key));
  }

  template <class T>
  T get(std::string_view key, T fallback)
  {
    if (auto v = optional<T>(key))
      return *v;
    cfg_.defaults_applied.push_back(join(path_, key));
    return fallback;
  }

  template <class T>
  std::optional<T> required(std::string_view key)
  {
    auto v = optional<T>(key);
    if (!v)
      problems_.push_back("missing field '" + join(path_, key) + "'");
    return v;
  }

  Section sub(std::string_view key)
  {
    const auto* n = node(key);
    if (n && !n->is_table())
      type_error(*n, join(path_, key), "a table");
    return Section(n ? n->as_table() : nullptr, join(path_, key), cfg_, problems_);
  }

  const toml::array* array(std::string_view key)
  {
    const auto* n = node(key);
    if (n && !n->is_array())
      type_error(*n, join(path_, key), "an array");
    return n ? n->as_array() : nullptr;
  }

  void finish()
  {
    if (!t_)
      return;
    for (const auto& [k, v] : *t_)
      if (!used_.count(std::string(k.str())))
        problems_.push_back("line " + std::to_string(v.source().begin.line) + ": unknown field '" +
                            join(path_, k.str()) + "'");
  }

  JobConfig& config() { return cfg_; }
  std::vector<std::string>& problems() { return problems_; }

private:
  const toml::table* t_;
  std::string path_;
  JobConfig& cfg_;
  std::vector<std::string>& problems_;
  std::set<std::string> used_;
};

Section table_of(const toml::node& n, const std::string& path, JobConfig& cfg,
                 std::vector<std::string>& problems)
{
  if (!n.is_table())
    type_error(n, path, "a table");
  return Section(n.as_table(), path, cfg, problems);
}

DielectricModel parse_term(Section& s)
{
  const auto kind = s.required<std::string>("kind");
  if (!kind)
    return DielectricModel::constant(1.0);
  try {
    if (*kind == "constant")
      return DielectricModel::constant(s.required<double>("eps").value_or(1.0));
    if (*kind == "drude")
      return DielectricModel::drude(s.required<double>("plasma").value_or(0.0),
                                    s.required<double>("damping").value_or(1.0));
    if (*kind == "lorentz")
      return DielectricModel::lorentz(s.required<double>("eps_static").value_or(1.0),
                                      s.required<double>("eps_inf").value_or(1.0),
                                      s.required<double>("resonance").value_or(1.0));
  } catch (const Error& e) {
    s.problems().push_back(s.path() + ": " + e.what());
    return DielectricModel::constant(1.0);
  }
  s.problems().push_back(s.path() + ": unknown term kind '" + *kind +
                         "' (constant, drude, lorentz)");
  return DielectricModel::constant(1.0);
}

void parse_materials(Section& root, JobConfig& cfg)
{
  auto mats = root.sub("materials");
  if (!mats.present())
    return;
  const toml::table* t = nullptr;
  {
    // every key of [materials] is a label
    const auto* n = root.node("materials");
    t = n->as_table();
  }
  for (const auto& [key, node] : *t) {
    const std::string label(key.str());
    mats.node(label);
    auto s = table_of(node, mats.path() + "." + label, cfg, mats.problems());
    Material m;
    m.label = label;
    if (auto p = s.optional<std::string>("preset")) {
      try {
        m = preset(*p);
        m.label = label;
      } catch (const Error& e) {
        mats.problems().push_back(s.path() + ": " + e.what());
      }
    } else if (const auto* arr = s.array("terms")) {
      std::vector<DielectricModel> parts;
      for (std::size_t i = 0; i < arr->size(); ++i) {
        auto ts = table_of(*arr->get(i), s.path() + ".terms[" + std::to_string(i) + "]", cfg,
                           mats.problems());
        parts.push_back(parse_term(ts));
        ts.finish();
      }
      if (parts.empty())
        mats.problems().push_back(s.path() + ": 'terms' must not be empty");
      else
        m.permittivity = parts.size() == 1 ? parts.front() : DielectricModel::composite(parts);
    } else {
      mats.problems().push_back(s.path() + ": needs 'preset' or 'terms'");
    }
    if (auto mu = s.optional<double>("mu"))
      m.permeability.mu = *mu;
    s.finish();
    try {
      cfg.materials.add(m);
      cfg.inline_materials.push_back(label);
    } catch (const Error& e) {
      mats.problems().push_back(s.path() + ": " + e.what());
    }
  }
}

// Omitted extents span the rest of the period (a strip along the other
// axis); they stay NaN until the period is known.
Inclusion parse_inclusion(Section& s)
{
  Inclusion q;
  q.material = s.required<std::string>("material").value_or("");
  q.x0 = s.optional<double>("x0").value_or(0.0);
  q.wx = s.optional<double>("wx").value_or(std::nan(""));
  q.y0 = s.optional<double>("y0").value_or(0.0);
  q.wy = s.optional<double>("wy").value_or(std::nan(""));
  return q;
}

struct StackDraft {
  LayerStack stack;
  bool has_period = false;
};

StackDraft parse_stack(Section& root, std::string_view side)
{
  auto stacks = root.sub("stack");
  auto s = stacks.sub(side);
  StackDraft d;
  if (!s.present()) {
    s.problems().push_back("missing table '" + s.path() + "'");
    return d;
  }
  const auto px = s.optional<double>("period_x");
  const auto py = s.optional<double>("period_y");
  d.has_period = px.has_value() || py.has_value();
  d.stack.cell.Lx = px.value_or(py.value_or(0.0));
  d.stack.cell.Ly = py.value_or(px.value_or(0.0));
  d.stack.exit = s.required<std::string>("substrate").value_or("");
  if (const auto* arr = s.array("layers")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      auto ls = table_of(*arr->get(i), s.path() + ".layers[" + std::to_string(i) + "]",
                         s.config(), s.problems());
      LayerSpec layer;
      layer.thickness = ls.required<double>("thickness").value_or(0.0);
      layer.background = ls.get<std::string>("background", std::string());
      if (const auto* inc = ls.array("inclusions")) {
        for (std::size_t j = 0; j < inc->size(); ++j) {
          auto is = table_of(*inc->get(j), ls.path() + ".inclusions[" + std::to_string(j) + "]",
                             s.config(), s.problems());
          layer.inclusions.push_back(parse_inclusion(is));
          is.finish();
        }
      }
      d.stack.layers.push_back(std::move(layer));
      ls.finish();
    }
  }
  s.finish();
  return d;
}

} // namespace

std::vector<double> SeparationGrid::points() const
{
  if (!explicit_values.empty())
    return explicit_values;
  std::vector<double> out;
  if (count == 1) {
    out.push_back(min);
    return out;
  }
  const double lmin = std::log(min), lmax = std::log(max);
  for (int i = 0; i < count; ++i)
    out.push_back(std::exp(lmin + (lmax - lmin) * i / (count - 1)));
  return out;
}

const char* to_string(ZeroFrequencyMode mode)
{
  switch (mode) {
  case ZeroFrequencyMode::direct: return "direct";
  case ZeroFrequencyMode::extrapolate: return "extrapolate";
  case ZeroFrequencyMode::both: return "both";
  }
  return "direct";
}

const char* to_string(BZScheme scheme)
{
  return scheme == BZScheme::graded_center ? "graded_center" : "gauss_legendre";
}

ZeroFrequencyMode parse_zero_frequency_mode(std::string_view s)
{
  if (s == "direct")
    return ZeroFrequencyMode::direct;
  if (s == "extrapolate")
    return ZeroFrequencyMode::extrapolate;
  if (s == "both")
    return ZeroFrequencyMode::both;
  throw Error(ErrorCode::ValidationError,
              "zero-frequency mode must be direct, extrapolate or both, not '" + std::string(s) + "'");
}

namespace {
void throw_if_any(const std::vector<std::string>& problems);
std::vector<std::string> collect_problems(const JobConfig& cfg);
} // namespace

JobConfig parse_config(std::string_view text, std::string_view source)
{
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
       << e.description();
    throw Error(ErrorCode::ParseError, os.str());
  }

  JobConfig cfg;
  std::vector<std::string> problems;
  Section root(&doc, "", cfg, problems);

  if (auto v = root.optional<int>("schema")) {
    cfg.schema = *v;
    if (*v != kSchemaVersion)
      problems.push_back("unsupported schema " + std::to_string(*v) + " (expected " +
                         std::to_string(kSchemaVersion) + ")");
  } else {
    problems.push_back("missing field 'schema'");
  }

  parse_materials(root, cfg);

  {
    auto g = root.sub("gap");
    cfg.gap = g.get<std::string>("material", "vacuum");
    g.finish();
  }

  auto left = parse_stack(root, "left");
  auto right = parse_stack(root, "right");
  {
    auto st = root.sub("stack");
    st.node("left");
    st.node("right");
    st.finish();
  }
  // Unmodulated stacks may omit the period: they borrow the other stack's,
  // or 400 nm when neither gives one.
  const double fallback = left.has_period ? left.stack.cell.Lx
                          : right.has_period ? right.stack.cell.Lx
                                             : 400e-9;
  for (auto* d : {&left, &right}) {
    if (!d->has_period)
      d->stack.cell = {fallback, fallback};
    for (auto& l : d->stack.layers)
      for (auto& q : l.inclusions) {
        if (std::isnan(q.wx))
          q.wx = d->stack.cell.Lx - q.x0;
        if (std::isnan(q.wy))
          q.wy = d->stack.cell.Ly - q.y0;
      }
  }
  if (!left.has_period)
    cfg.defaults_applied.push_back("stack.left.period_x");
  if (!right.has_period)
    cfg.defaults_applied.push_back("stack.right.period_x");
  cfg.left = std::move(left.stack);
  cfg.right = std::move(right.stack);
  for (auto* s : {&cfg.left, &cfg.right}) {
    s->incident = cfg.gap;
    for (auto& l : s->layers)
      if (l.background.empty())
        l.background = cfg.gap;
  }

  {
    auto n = root.sub("numerics");
    auto& o = cfg.numerics;
    o.matsubara.temperature = n.get<double>("temperature", 300.0);
    o.matsubara.terms = n.get<int>("matsubara_terms", 36);
    o.adaptive_matsubara = n.get<bool>("adaptive_matsubara", false);
    o.max_terms = n.get<int>("max_matsubara_terms", 4096);
    o.tail_tolerance = n.get<double>("tail_tolerance", 1e-4);
    cfg.strict_tail = n.get<bool>("strict_tail", false);
    const int orders = n.get<int>("orders", 5);
    o.order.N = n.optional<int>("orders_x").value_or(orders);
    o.order.M = n.optional<int>("orders_y").value_or(orders);
    o.quadrature.nodes_per_dim = n.get<int>("quadrature_nodes", 16);
    const auto scheme = n.get<std::string>("quadrature_scheme", "gauss_legendre");
    if (scheme == "gauss_legendre")
      o.quadrature.scheme = BZScheme::gauss_legendre;
    else if (scheme == "graded_center")
      o.quadrature.scheme = BZScheme::graded_center;
    else
      problems.push_back("numerics.quadrature_scheme must be gauss_legendre or graded_center");
    o.quadrature.grading = n.get<int>("quadrature_grading", 3);
    try {
      o.zero_frequency = parse_zero_frequency_mode(n.get<std::string>("zero_frequency", "direct"));
    } catch (const Error& e) {
      problems.push_back(std::string("numerics: ") + e.what());
    }
    if (auto f = n.optional<double>("sigma_floor"))
      o.sigma_floor = *f;
    else
      cfg.defaults_applied.push_back("numerics.sigma_floor");
    o.check_floor = n.get<bool>("check_floor", true);
    o.workers = n.get<int>("workers", 1);
    o.use_symmetry = n.get<bool>("use_symmetry", false);
    o.check_spectral_radius = n.get<bool>("check_spectral_radius", false);
    if (const auto* arr = n.array("separations")) {
      for (std::size_t i = 0; i < arr->size(); ++i)
        cfg.separations.explicit_values.push_back(
          convert<double>(*arr->get(i), "numerics.separations[" + std::to_string(i) + "]"));
    } else {
      cfg.separations.min = n.get<double>("separation_min", 100e-9);
      cfg.separations.max = n.get<double>("separation_max", 2e-6);
      cfg.separations.count = n.get<int>("separation_count", 30);
    }
    n.finish();
  }

  {
    auto s = root.sub("output");
    auto& out = cfg.output;
    out.directory = s.get<std::string>("directory", out.directory);
    out.force_curve = s.get<std::string>("force_curve", out.force_curve);
    out.diagnostics = s.get<std::string>("diagnostics", out.diagnostics);
    out.manifest = s.get<std::string>("manifest", out.manifest);
    out.error_report = s.get<std::string>("error_report", out.error_report);
    out.dump_spectra = s.get<bool>("dump_spectra", false);
    out.dump_reflection = s.get<bool>("dump_reflection", false);
    s.finish();
  }

  {
    auto s = root.sub("pfa");
    cfg.pfa.sphere_radius = s.get<double>("sphere_radius", 50e-6);
    cfg.pfa.baseline = s.get<bool>("baseline", false);
    s.finish();
  }

  root.finish();
  for (auto& p : collect_problems(cfg))
    problems.push_back(std::move(p));
  throw_if_any(problems);
  return cfg;
}

JobConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ParseError, "cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

void throw_if_any(const std::vector<std::string>& problems)
{
  if (problems.empty())
    return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems)
    msg += "\n  - " + p;
  throw Error(ErrorCode::ValidationError, msg);
}

std::vector<std::string> collect_problems(const JobConfig& cfg)
{
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok)
      problems.push_back(what);
  };
  const auto& o = cfg.numerics;
  check(cfg.materials.contains(cfg.gap), "unknown gap material '" + cfg.gap + "'");
  check(o.matsubara.temperature > 0.0, "numerics.temperature must be > 0");
  check(o.matsubara.terms >= 1, "numerics.matsubara_terms must be >= 1");
  check(o.max_terms >= o.matsubara.terms, "numerics.max_matsubara_terms must be >= matsubara_terms");
  check(o.tail_tolerance > 0.0, "numerics.tail_tolerance must be > 0");
  check(o.order.N >= 0 && o.order.M >= 0, "truncation orders must be >= 0");
  check(o.quadrature.nodes_per_dim >= 1, "numerics.quadrature_nodes must be >= 1");
  check(o.quadrature.grading >= 1, "numerics.quadrature_grading must be >= 1");
  check(!o.sigma_floor || *o.sigma_floor > 0.0, "numerics.sigma_floor must be > 0");
  check(o.workers >= 1, "numerics.workers must be >= 1");
  const auto seps = cfg.separations.points();
  check(!seps.empty(), "no separations");
  for (double a : seps)
    check(a > 0.0 && std::isfinite(a), "separations must be positive");
  if (cfg.separations.explicit_values.empty()) {
    check(cfg.separations.min > 0.0 && cfg.separations.max >= cfg.separations.min,
          "need 0 < separation_min <= separation_max");
    check(cfg.separations.count >= 1, "numerics.separation_count must be >= 1");
  }
  check(cfg.pfa.sphere_radius > 0.0, "pfa.sphere_radius must be > 0");
  check(!cfg.output.directory.empty(), "output.directory must not be empty");

  for (const auto* s : {&cfg.left, &cfg.right}) {
    const std::string name = s == &cfg.left ? "stack.left" : "stack.right";
    try {
      modcas::validate(*s, cfg.materials);
    } catch (const Error& e) {
      // nested list, one level deeper
      std::string what = e.what();
      for (std::size_t i = 0; (i = what.find('\n', i)) != std::string::npos; i += 5)
        what.insert(i + 1, "    ");
      problems.push_back(name + ": " + what);
    }
  }
  if (cfg.left.cell.Lx > 0 && cfg.right.cell.Lx > 0 && cfg.left.cell.Ly > 0 &&
      cfg.right.cell.Ly > 0) {
    try {
      common_period(cfg.left.cell, cfg.right.cell);
    } catch (const Error& e) {
      problems.push_back(std::string("stack periods: ") + e.what());
    }
  }
  return problems;
}

} // namespace

void validate(const JobConfig& cfg)
{
  throw_if_any(collect_problems(cfg));
}

nlohmann::json to_json(const Material& m)
{
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : m.permittivity.terms()) {
    if (const auto* c = std::get_if<ConstantTerm>(&t))
      terms.push_back({{"kind", "constant"}, {"eps", c->eps}});
    else if (const auto* d = std::get_if<DrudeTerm>(&t))
      terms.push_back({{"kind", "drude"}, {"plasma", d->plasma}, {"damping", d->damping}});
    else if (const auto* l = std::get_if<LorentzTerm>(&t))
      terms.push_back({{"kind", "lorentz"},
                       {"eps_static", l->eps_static},
                       {"eps_inf", l->eps_inf},
                       {"resonance", l->resonance}});
  }
  return {{"label", m.label}, {"terms", terms}, {"mu", m.permeability.mu}};
}

namespace {

nlohmann::json stack_json(const LayerStack& s)
{
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : s.layers) {
    nlohmann::json inc = nlohmann::json::array();
    for (const auto& q : l.inclusions)
      inc.push_back({{"material", q.material}, {"x0", q.x0}, {"y0", q.y0}, {"wx", q.wx}, {"wy", q.wy}});
    layers.push_back({{"thickness", l.thickness}, {"background", l.background}, {"inclusions", inc}});
  }
  return {{"period_x", s.cell.Lx}, {"period_y", s.cell.Ly}, {"incident", s.incident},
          {"layers", layers}, {"substrate", s.exit}};
}

} // namespace

nlohmann::json to_json(const JobConfig& cfg)
{
  const auto& o = cfg.numerics;
  nlohmann::json mats = nlohmann::json::object();
  for (const auto& label : cfg.materials.labels())
    mats[label] = to_json(cfg.materials.at(label));
  nlohmann::json seps = {{"points", cfg.separations.points()}};
  if (cfg.separations.explicit_values.empty()) {
    seps["min"] = cfg.separations.min;
    seps["max"] = cfg.separations.max;
    seps["count"] = cfg.separations.count;
  }
  nlohmann::json numerics = {
    {"temperature", o.matsubara.temperature},
    {"matsubara_terms", o.matsubara.terms},
    {"adaptive_matsubara", o.adaptive_matsubara},
    {"max_matsubara_terms", o.max_terms},
    {"tail_tolerance", o.tail_tolerance},
    {"strict_tail", cfg.strict_tail},
    {"orders_x", o.order.N},
    {"orders_y", o.order.M},
    {"quadrature_nodes", o.quadrature.nodes_per_dim},
    {"quadrature_scheme", to_string(o.quadrature.scheme)},
    {"quadrature_grading", o.quadrature.grading},
    {"zero_frequency", to_string(o.zero_frequency)},
    {"sigma_floor", o.sigma_floor ? nlohmann::json(*o.sigma_floor) : nlohmann::json("auto")},
    {"check_floor", o.check_floor},
    {"workers", o.workers},
    {"use_symmetry", o.use_symmetry},
    {"check_spectral_radius", o.check_spectral_radius},
    {"separations", seps},
  };
  return {
    {"schema", cfg.schema},
    {"materials", mats},
    {"inline_materials", cfg.inline_materials},
    {"gap", cfg.gap},
    {"stack", {{"left", stack_json(cfg.left)}, {"right", stack_json(cfg.right)}}},
    {"numerics", numerics},
    {"output",
     {{"directory", cfg.output.directory},
      {"force_curve", cfg.output.force_curve},
      {"diagnostics", cfg.output.diagnostics},
      {"manifest", cfg.output.manifest},
      {"error_report", cfg.output.error_report},
      {"dump_spectra", cfg.output.dump_spectra},
      {"dump_reflection", cfg.output.dump_reflection}}},
    {"pfa", {{"sphere_radius", cfg.pfa.sphere_radius}, {"baseline", cfg.pfa.baseline}}},
    {"defaults_applied", cfg.defaults_applied},
  };
}

} // namespace modcas::cli
