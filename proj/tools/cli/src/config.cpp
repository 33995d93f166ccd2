#include "koopkern/cli/config.hpp"

#include "koopkern/dynamics.hpp"
#include "koopkern/errors.hpp"
#include "koopkern/mkl.hpp"
#include "koopkern/variational.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace koopkern::cli {

namespace pt = boost::property_tree;

std::string format_double(double v) { return fmt::format("{}", v); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(fmt::format("{}: empty value", where));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", where, t));
  return v;
}

long long to_integer(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(fmt::format("{}: '{}' is not an integer", where, t));
  return v;
}

int to_int(const std::string& text, const std::string& where) {
  const long long v = to_integer(text, where);
  if (v < -1000000000LL || v > 1000000000LL)
    throw ConfigError(fmt::format("{}: {} out of range", where, v));
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  if (t.empty() || t[0] == '-') throw ConfigError(fmt::format("{}: '{}' is not a u64", where, t));
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(fmt::format("{}: '{}' is not a u64", where, t));
  return v;
}

bool to_bool(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", where, t));
}

std::vector<double> to_doubles(const std::string& text, const std::string& where) {
  std::vector<double> out;
  for (const auto& tok : split_ws(text)) out.push_back(to_double(tok, where));
  return out;
}

std::vector<int> to_ints(const std::string& text, const std::string& where) {
  std::vector<int> out;
  for (const auto& tok : split_ws(text)) out.push_back(to_int(tok, where));
  return out;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& xs, Fmt&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += f(xs[i]);
  }
  return out;
}

const std::set<std::string> kKinds{"solve", "mkl", "path-integral", "mercer", "unify"};

}  // namespace

KernelSpec parse_kernel(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  std::string family = t.substr(0, open);
  std::map<std::string, double> params;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError(fmt::format("kernel '{}': missing ')'", t));
    const std::string body = t.substr(open + 1, t.size() - open - 2);
    std::size_t pos = 0;
    while (pos <= body.size() && !trim(body).empty()) {
      const auto comma = body.find(',', pos);
      const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ConfigError(fmt::format("kernel '{}': expected key=value, got '{}'", t, item));
      const std::string key = trim(item.substr(0, eq));
      if (!params.emplace(key, to_double(item.substr(eq + 1), "kernel " + key)).second)
        throw ConfigError(fmt::format("kernel '{}': duplicate parameter '{}'", t, key));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  family = trim(family);
  if (family == "rank_one")
    throw ConfigError("kernel rank_one is built by the path-integral experiment, not from config");
  try {
    return KernelSpec::from_params(family, params);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

std::string kernel_string(const KernelSpec& spec) {
  const auto params = spec.params();
  std::string out = to_string(spec.family());
  if (params.empty()) return out;
  out += '(';
  bool first = true;
  // degree before coef0 reads better than alphabetical order.
  auto emit = [&](const std::string& k, double v) {
    if (!first) out += ',';
    first = false;
    out += k + '=' + format_double(v);
  };
  if (auto it = params.find("degree"); it != params.end()) emit(it->first, it->second);
  for (const auto& [k, v] : params)
    if (k != "degree") emit(k, v);
  return out + ')';
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config: {}", e.message()));
  }

  ExperimentConfig c;
  static const std::map<std::string, std::set<std::string>> known{
      {"experiment", {"name", "kind", "seed"}},
      {"system", {}},
      {"eigen", {"lambda", "index"}},
      {"kernel", {"spec", "compare", "mixture", "weights"}},
      {"grid", {"lower", "upper", "counts"}},
      {"penalties", {"eta", "mu_grad", "mu_trace", "mu_layer", "layer_fraction", "hard_anchor"}},
      {"path_integral", {"T", "M", "escape_radius"}},
      {"mkl", {"kernels", "lambda_l1", "tau", "max_iterations", "gradient_tolerance", "init_jitter"}},
      {"mercer", {"modes"}},
      {"unify", {"c", "lambda", "a", "lo", "hi", "n", "panels", "order"}},
      {"output", {"dir"}},
  };

  for (const auto& [section, body] : tree) {
    const auto ks = known.find(section);
    if (ks == known.end()) {
      if (body.empty() && !body.data().empty())
        throw ConfigError(fmt::format("config: key '{}' outside any section", section));
      throw ConfigError(fmt::format("config: unknown section [{}]", section));
    }
    for (const auto& [key, node] : body) {
      const std::string where = fmt::format("[{}] {}", section, key);
      const std::string v = trim(node.data());
      if (section == "system") {
        if (key == "name")
          c.system = v;
        else
          c.system_params[key] = to_double(v, where);
        continue;
      }
      if (!ks->second.count(key)) throw ConfigError(fmt::format("config: unknown key {}", where));

      if (section == "experiment") {
        if (key == "name") c.name = v;
        if (key == "kind") c.kind = v;
        if (key == "seed") c.seed = to_u64(v, where);
      } else if (section == "eigen") {
        if (key == "lambda") c.lambda = to_double(v, where);
        if (key == "index") c.eigen_index = to_int(v, where);
      } else if (section == "kernel") {
        if (key == "spec") c.kernel = v;
        if (key == "compare") c.compare_kernels = split_ws(v);
        if (key == "mixture") c.mixture_kernels = split_ws(v);
        if (key == "weights") c.mixture_weights = to_doubles(v, where);
      } else if (section == "grid") {
        if (key == "lower") c.lower = to_doubles(v, where);
        if (key == "upper") c.upper = to_doubles(v, where);
        if (key == "counts") c.counts = to_ints(v, where);
      } else if (section == "penalties") {
        if (key == "eta") c.eta = to_double(v, where);
        if (key == "mu_grad") c.mu_grad = to_double(v, where);
        if (key == "mu_trace") c.mu_trace = to_double(v, where);
        if (key == "mu_layer") c.mu_layer = to_double(v, where);
        if (key == "layer_fraction") c.layer_fraction = to_double(v, where);
        if (key == "hard_anchor") c.hard_anchor = to_bool(v, where);
      } else if (section == "path_integral") {
        if (key == "T") c.pi_T = to_double(v, where);
        if (key == "M") c.pi_M = to_int(v, where);
        if (key == "escape_radius") c.escape_radius = to_double(v, where);
      } else if (section == "mkl") {
        if (key == "kernels") c.mkl_kernels = split_ws(v);
        if (key == "lambda_l1") c.lambda_l1 = to_double(v, where);
        if (key == "tau") c.tau = to_double(v, where);
        if (key == "max_iterations") c.max_iterations = to_int(v, where);
        if (key == "gradient_tolerance") c.gradient_tolerance = to_double(v, where);
        if (key == "init_jitter") c.init_jitter = to_double(v, where);
      } else if (section == "mercer") {
        c.mercer_modes = to_int(v, where);
      } else if (section == "unify") {
        if (key == "c") c.unify_c = to_double(v, where);
        if (key == "lambda") c.unify_lambda = to_double(v, where);
        if (key == "a") c.unify_a = to_double(v, where);
        if (key == "lo") c.unify_lo = to_double(v, where);
        if (key == "hi") c.unify_hi = to_double(v, where);
        if (key == "n") c.unify_n = to_int(v, where);
        if (key == "panels") c.quad_panels = to_int(v, where);
        if (key == "order") c.quad_order = to_int(v, where);
      } else if (section == "output") {
        c.output_dir = v;
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path));
  return parse_config(in);
}

std::string to_ini(const ExperimentConfig& c) {
  auto d = [](double v) { return format_double(v); };
  auto i = [](int v) { return std::to_string(v); };
  auto s = [](const std::string& v) { return v; };

  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + '\n'; };
  auto section = [&](const char* name) {
    if (!out.empty()) out += '\n';
    out += fmt::format("[{}]\n", name);
  };

  section("experiment");
  line("name", c.name);
  line("kind", c.kind);
  line("seed", std::to_string(c.seed));

  section("system");
  line("name", c.system);
  for (const auto& [k, v] : c.system_params) line(k, d(v));

  section("eigen");
  if (c.lambda) line("lambda", d(*c.lambda));
  line("index", i(c.eigen_index));

  section("kernel");
  line("spec", c.kernel);
  line("compare", join(c.compare_kernels, s));
  line("mixture", join(c.mixture_kernels, s));
  line("weights", join(c.mixture_weights, d));

  section("grid");
  line("lower", join(c.lower, d));
  line("upper", join(c.upper, d));
  line("counts", join(c.counts, i));

  section("penalties");
  line("eta", d(c.eta));
  line("mu_grad", d(c.mu_grad));
  line("mu_trace", d(c.mu_trace));
  line("mu_layer", d(c.mu_layer));
  line("layer_fraction", d(c.layer_fraction));
  line("hard_anchor", c.hard_anchor ? "true" : "false");

  section("path_integral");
  line("T", d(c.pi_T));
  line("M", i(c.pi_M));
  line("escape_radius", d(c.escape_radius));

  section("mkl");
  line("kernels", join(c.mkl_kernels, s));
  line("lambda_l1", d(c.lambda_l1));
  line("tau", d(c.tau));
  line("max_iterations", i(c.max_iterations));
  line("gradient_tolerance", d(c.gradient_tolerance));
  line("init_jitter", d(c.init_jitter));

  section("mercer");
  line("modes", i(c.mercer_modes));

  section("unify");
  line("c", d(c.unify_c));
  line("lambda", d(c.unify_lambda));
  line("a", d(c.unify_a));
  line("lo", d(c.unify_lo));
  line("hi", d(c.unify_hi));
  line("n", i(c.unify_n));
  line("panels", i(c.quad_panels));
  line("order", i(c.quad_order));

  section("output");
  line("dir", c.output_dir);
  return out;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void validate_grid(const ExperimentConfig& c, int dim) {
  require(static_cast<int>(c.lower.size()) == dim && static_cast<int>(c.upper.size()) == dim &&
              static_cast<int>(c.counts.size()) == dim,
          fmt::format("[grid] lower/upper/counts need {} entries for system {}", dim, c.system));
  for (int k = 0; k < dim; ++k) {
    require(c.counts[k] >= 2, fmt::format("[grid] counts[{}] = {} < 2", k, c.counts[k]));
    require(c.lower[k] < c.upper[k], fmt::format("[grid] axis {}: lower must be < upper", k));
  }
  long long total = 1;
  for (int n : c.counts) total *= n;
  require(total <= 10000, fmt::format("[grid] {} points exceed the 10^4 cap", total));
}

void validate_kernel_for_grid(const KernelSpec& k, const ExperimentConfig& c) {
  if (k.family() != KernelFamily::singular_1d) return;
  require(c.lower.size() == 1, "singular_1d is a 1D kernel");
  require(c.lower[0] > -1.0 && c.upper[0] < 1.0, "singular_1d needs a grid inside (-1, 1)");
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(!c.name.empty(), "[experiment] name must not be empty");
  require(c.name.find_first_of("/\\ ") == std::string::npos,
          "[experiment] name must not contain '/', '\\' or spaces");
  require(kKinds.count(c.kind) == 1, fmt::format("[experiment] unknown kind '{}'", c.kind));
  require(!c.output_dir.empty(), "[output] dir must not be empty");

  if (c.kind == "unify") {
    require(c.unify_c > 0.0, "[unify] c must be > 0");
    require(c.unify_lambda > 0.0, "[unify] lambda must be > 0");
    require(c.unify_a < c.unify_lo && c.unify_lo < c.unify_hi, "[unify] need a < lo < hi");
    require(c.unify_n >= 1, "[unify] n must be >= 1");
    require(c.quad_panels >= 1 && c.quad_order >= 1 && c.quad_panels * c.quad_order >= 2,
            "[unify] quadrature needs at least 2 nodes");
    return;
  }

  SystemPtr sys;
  try {
    sys = make_system(c.system, c.system_params);
  } catch (const Error& e) {
    throw ConfigError(fmt::format("[system] {}", e.what()));
  }
  validate_grid(c, sys->dim());

  auto check_kernel = [&](const std::string& text) {
    const auto k = parse_kernel(text);
    validate_kernel_for_grid(k, c);
    return k;
  };

  if (c.kind == "mercer") {
    require(c.mercer_modes >= 1, "[mercer] modes must be >= 1");
    check_kernel(c.kernel);
    return;
  }

  // solve, mkl and path-integral need an eigenvalue of the linearization.
  try {
    const auto lin = linearize(*sys);
    if (c.lambda) {
      require(*c.lambda != 0.0 || c.kind != "path-integral", "[eigen] lambda must be nonzero");
      (void)lin.index_of(*c.lambda);
    } else {
      require(c.eigen_index >= 0 && c.eigen_index < static_cast<int>(lin.eigenvalues.size()),
              fmt::format("[eigen] index {} outside the spectrum of size {}", c.eigen_index,
                          lin.eigenvalues.size()));
    }
  } catch (const Error& e) {
    throw ConfigError(fmt::format("[eigen] {}", e.what()));
  }

  PenaltyConfig pen;
  pen.eta = c.eta;
  pen.mu_grad = c.mu_grad;
  pen.mu_trace = c.mu_trace;
  pen.mu_layer = c.mu_layer;
  pen.layer_fraction = c.layer_fraction;
  pen.hard_anchor = c.hard_anchor;
  try {
    pen.validate();
  } catch (const Error& e) {
    throw ConfigError(fmt::format("[penalties] {}", e.what()));
  }

  if (c.kind == "solve") {
    if (c.mixture_kernels.empty()) {
      check_kernel(c.kernel);
    } else {
      require(c.mixture_kernels.size() == c.mixture_weights.size(),
              "[kernel] mixture and weights need the same length");
      std::vector<KernelSpec> ks;
      for (const auto& k : c.mixture_kernels) ks.push_back(check_kernel(k));
      try {
        (void)KernelMixture(ks, c.mixture_weights);
      } catch (const Error& e) {
        throw ConfigError(fmt::format("[kernel] {}", e.what()));
      }
    }
    for (const auto& k : c.compare_kernels) check_kernel(k);
  } else if (c.kind == "mkl") {
    require(c.max_iterations >= 0, "[mkl] max_iterations must be >= 0");
    require(c.gradient_tolerance >= 0.0, "[mkl] gradient_tolerance must be >= 0");
    MKLConfig m;
    if (!c.mkl_kernels.empty()) {
      m.kernels.clear();
      for (const auto& k : c.mkl_kernels) m.kernels.push_back(check_kernel(k));
    }
    m.lambda_l1 = c.lambda_l1;
    m.tau = c.tau;
    m.init_jitter = c.init_jitter;
    m.penalties = pen;
    try {
      m.validate();
    } catch (const Error& e) {
      throw ConfigError(fmt::format("[mkl] {}", e.what()));
    }
  } else if (c.kind == "path-integral") {
    require(c.pi_T > 0.0, "[path_integral] T must be > 0");
    require(c.pi_M >= 1, "[path_integral] M must be >= 1");
    require(c.escape_radius > 0.0, "[path_integral] escape_radius must be > 0");
  }
}

}  // namespace koopkern::cli
