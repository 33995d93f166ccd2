#include "koopkern/cli/experiment.hpp"

#include "koopkern/char_kernel.hpp"
#include "koopkern/errors.hpp"
#include "koopkern/mkl.hpp"
#include "koopkern/parallel.hpp"
#include "koopkern/spectral.hpp"
#include "koopkern/transport_green.hpp"
#include "koopkern/variational.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>

namespace koopkern::cli {

// Bumped whenever a preset or module default changes meaning.
constexpr int kDefaultsVersion = 1;

std::string format_cell(double v) { return fmt::format("{:.17g}", v); }

void Metrics::add(const std::string& key, double value) {
  if (!std::isfinite(value))
    throw IllConditioned(fmt::format("metric {} is not finite ({})", key, value), value);
  entries_.emplace_back(key, format_cell(value));
}

void Metrics::add(const std::string& key, const std::string& value) {
  std::string v = value;
  for (char& ch : v)
    if (ch == '\n' || ch == '\r') ch = ' ';
  entries_.emplace_back(key, std::move(v));
}

void Metrics::add_int(const std::string& key, long long value) {
  entries_.emplace_back(key, std::to_string(value));
}

void Metrics::add_bool(const std::string& key, bool value) {
  entries_.emplace_back(key, value ? "true" : "false");
}

std::optional<std::string> Metrics::text(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::optional<double> Metrics::number(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t->c_str(), &end);
  if (end == t->c_str()) return std::nullopt;
  return v;
}

namespace {

struct Setup {
  SystemPtr system;
  Points grid;
  PenaltyConfig penalties;
  std::vector<std::string> coords;
};

Setup setup(const ExperimentConfig& c) {
  Setup s;
  s.system = make_system(c.system, c.system_params);
  const auto d = static_cast<Eigen::Index>(c.lower.size());
  s.grid = tensor_grid(Eigen::Map<const Vec>(c.lower.data(), d),
                       Eigen::Map<const Vec>(c.upper.data(), d), c.counts);
  s.penalties.eta = c.eta;
  s.penalties.mu_grad = c.mu_grad;
  s.penalties.mu_trace = c.mu_trace;
  s.penalties.mu_layer = c.mu_layer;
  s.penalties.layer_fraction = c.layer_fraction;
  s.penalties.hard_anchor = c.hard_anchor;
  if (d == 1) {
    s.coords = {"x"};
  } else {
    for (Eigen::Index k = 0; k < d; ++k) s.coords.push_back(fmt::format("x{}", k + 1));
  }
  return s;
}

double resolve_lambda(const ExperimentConfig& c, const LinearizationInfo& lin) {
  if (c.lambda) return lin.eigenvalues[lin.index_of(*c.lambda)];
  return lin.eigenvalues[static_cast<std::size_t>(c.eigen_index)];
}

std::vector<std::string> coord_cells(const Vec& x) {
  std::vector<std::string> out;
  for (Eigen::Index k = 0; k < x.size(); ++k) out.push_back(format_cell(x[k]));
  return out;
}

// Coordinates, phi, phi_ref, abs_err. Reference cells stay empty when the
// system ships no closed form for lambda.
Table solution_table(const Setup& s, const Vec& phi, const ReferenceEigenpair* ref) {
  Table t;
  t.artifact = "solution";
  t.header = s.coords;
  for (const char* h : {"phi", "phi_ref", "abs_err"}) t.header.emplace_back(h);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    auto row = coord_cells(s.grid[i]);
    const double v = phi[static_cast<Eigen::Index>(i)];
    row.push_back(format_cell(v));
    if (ref) {
      const double r = ref->phi(s.grid[i]);
      row.push_back(format_cell(r));
      row.push_back(format_cell(std::abs(v - r)));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void solution_metrics(Metrics& m, const Solution& s, const std::string& prefix = "") {
  m.add(prefix + "residual_norm", s.residual_norm);
  m.add(prefix + "anchor_error", s.anchor_error);
  m.add(prefix + "jitter", s.jitter);
  m.add_bool(prefix + "non_smooth", s.non_smooth);
  for (Eigen::Index k = 0; k < s.derivative_at_anchor.size(); ++k)
    m.add(fmt::format("{}grad_anchor_{}", prefix, k + 1), s.derivative_at_anchor[k]);
  if (s.rmse_raw) m.add(prefix + "rmse_raw", *s.rmse_raw);
  if (s.rmse_rescaled) m.add(prefix + "rmse_rescaled", *s.rmse_rescaled);
  if (s.rescale_factor) m.add(prefix + "c_star", *s.rescale_factor);
}

KernelMixture config_mixture(const ExperimentConfig& c) {
  if (c.mixture_kernels.empty()) return KernelMixture::single(parse_kernel(c.kernel));
  std::vector<KernelSpec> ks;
  for (const auto& k : c.mixture_kernels) ks.push_back(parse_kernel(k));
  return KernelMixture(std::move(ks), c.mixture_weights);
}

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void run_solve(const ExperimentConfig& c, Report& r) {
  const auto s = setup(c);
  const auto lin = linearize(*s.system);
  const double lambda = resolve_lambda(c, lin);
  const auto mixture = config_mixture(c);
  r.metrics.add("lambda", lambda);
  r.metrics.add("kernel", mixture.describe());

  const auto sol = solve(make_problem(s.system, lambda, mixture, s.grid, s.penalties));
  solution_metrics(r.metrics, sol);
  const auto* ref = s.system->reference_for(lambda);
  r.tables.push_back(solution_table(s, evaluate(sol, s.grid), ref));
  if (sol.non_smooth) r.warnings.push_back("a collocation point sits on a kernel kink");

  if (c.compare_kernels.empty()) return;
  Table cmp;
  cmp.artifact = "compare";
  cmp.header = {"kernel", "residual_norm", "rmse_raw", "rmse_rescaled", "c_star", "status"};
  auto opt_cell = [](const std::optional<double>& v) { return v ? format_cell(*v) : std::string(); };
  auto add_row = [&](const std::string& name, const Solution& x) {
    cmp.rows.push_back({quote(name), format_cell(x.residual_norm), opt_cell(x.rmse_raw),
                        opt_cell(x.rmse_rescaled), opt_cell(x.rescale_factor), "ok"});
  };
  add_row(mixture.describe(), sol);
  for (const auto& text : c.compare_kernels) {
    const auto k = parse_kernel(text);
    try {
      add_row(k.describe(),
              solve(make_problem(s.system, lambda, KernelMixture::single(k), s.grid, s.penalties)));
    } catch (const BlowUp&) {
      throw;
    } catch (const Error& e) {
      cmp.rows.push_back({quote(k.describe()), "", "", "", "", quote(e.what())});
    }
  }
  r.metrics.add_int("compare_count", static_cast<long long>(cmp.rows.size()));
  r.tables.push_back(std::move(cmp));
}

void run_mkl(const ExperimentConfig& c, Report& r) {
  const auto s = setup(c);
  const auto lin = linearize(*s.system);
  const double lambda = resolve_lambda(c, lin);

  MKLConfig m;
  if (!c.mkl_kernels.empty()) {
    m.kernels.clear();
    for (const auto& k : c.mkl_kernels) m.kernels.push_back(parse_kernel(k));
  }
  m.penalties = s.penalties;
  m.lambda_l1 = c.lambda_l1;
  m.tau = c.tau;
  m.seed = c.seed;
  m.init_jitter = c.init_jitter;
  m.optimizer.max_iterations = c.max_iterations;
  m.optimizer.gradient_tolerance = c.gradient_tolerance;

  const auto res = sparsify(mkl_solve(s.system, lambda, s.grid, m), c.tau);
  r.metrics.add("lambda", lambda);
  r.metrics.add_int("n_kernels", static_cast<long long>(res.kernels.size()));
  r.metrics.add_int("iterations", res.iterations);
  r.metrics.add_bool("converged", res.converged);
  r.metrics.add("stop_reason", res.stop_reason);
  r.metrics.add("loss_initial", res.loss_trace.front());
  r.metrics.add("loss_final", res.loss_trace.back());
  r.metrics.add("l1_mass", res.l1_mass);
  r.metrics.add("l1_note", res.l1_note);
  double bmin = 1.0;
  double bmax = 0.0;
  for (double b : res.beta) {
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
  }
  r.metrics.add("beta_min", bmin);
  r.metrics.add("beta_max", bmax);
  solution_metrics(r.metrics, res.solution);

  Table w;
  w.artifact = "weights";
  w.header = {"kernel", "beta", "beta_pruned"};
  for (std::size_t l = 0; l < res.kernels.size(); ++l)
    w.rows.push_back({quote(kernel_string(res.kernels[l])), format_cell(res.beta[l]),
                      format_cell(res.pruned_beta.empty() ? 0.0 : res.pruned_beta[l])});
  r.tables.push_back(std::move(w));

  Table tr;
  tr.artifact = "trace";
  tr.header = {"iter", "loss"};
  for (std::size_t l = 0; l < res.kernels.size(); ++l) tr.header.push_back(fmt::format("beta_{}", l + 1));
  for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), format_cell(res.loss_trace[i])};
    if (i < res.beta_trace.size())
      for (double b : res.beta_trace[i]) row.push_back(format_cell(b));
    tr.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(tr));

  const auto* ref = s.system->reference_for(lambda);
  r.tables.push_back(solution_table(s, evaluate(res.solution, s.grid), ref));

  if (res.pruned_beta.empty()) {
    r.metrics.add_int("pruned_kept", 0);
    r.metrics.add("pruned_model", "empty");
    r.warnings.push_back(fmt::format("every weight is below tau={}; the pruned model is zero", c.tau));
    return;
  }
  const auto pruned = pruned_mixture(res);
  r.metrics.add_int("pruned_kept", static_cast<long long>(pruned.size()));
  r.metrics.add("pruned_model", pruned.describe());
  solution_metrics(r.metrics, refit_pruned(s.system, lambda, s.grid, pruned, s.penalties), "pruned_");
}

void run_path_integral(const ExperimentConfig& c, Report& r) {
  const auto s = setup(c);
  const auto lin = linearize(*s.system);
  const double lambda = resolve_lambda(c, lin);
  const auto pic = mode_kernel_select(lin, lambda, c.pi_T, c.pi_M, c.escape_radius);
  const auto ev = std::make_shared<const XiEvaluator>(s.system, lin, pic);

  r.metrics.add("lambda", lambda);
  r.metrics.add("direction", to_string(pic.direction));
  r.metrics.add("T", pic.horizon);
  r.metrics.add_int("M", pic.steps);
  r.metrics.add("dt", pic.dt());
  for (Eigen::Index k = 0; k < pic.w.size(); ++k) r.metrics.add(fmt::format("w_{}", k + 1), pic.w[k]);

  const Vec xi = ev->values(s.grid);
  const auto n = s.grid.size();
  Vec resid(static_cast<Eigen::Index>(n));
  Vec pred(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    resid[k] = ev->koopman_residual(s.grid[i]);
    pred[k] = ev->predicted_residual(s.grid[i]);
  });

  const double mean_xi = xi.cwiseAbs().mean();
  const double mean_res = resid.cwiseAbs().mean();
  r.metrics.add("mean_abs_phi", mean_xi);
  r.metrics.add("mean_abs_residual", mean_res);
  r.metrics.add("max_abs_residual", resid.cwiseAbs().maxCoeff());
  r.metrics.add("residual_ratio", mean_res / mean_xi);
  r.metrics.add("mean_abs_predicted_residual", pred.cwiseAbs().mean());
  r.metrics.add("max_residual_vs_predicted", (resid - pred).cwiseAbs().maxCoeff());

  const auto* ref = s.system->reference_for(lambda);
  if (ref) {
    const Vec truth = evaluate_on(ref->phi, s.grid);
    r.metrics.add("rmse_raw", std::sqrt((xi - truth).squaredNorm() / static_cast<double>(n)));
    r.metrics.add("max_abs_err", (xi - truth).cwiseAbs().maxCoeff());
    const auto rr = rescale_rmse(xi, truth);
    r.metrics.add("rmse_rescaled", rr.rmse);
    r.metrics.add("c_star", rr.c_star);
  }
  r.tables.push_back(solution_table(s, xi, ref));

  Table rt;
  rt.artifact = "residual";
  rt.header = s.coords;
  rt.header.emplace_back("residual");
  rt.header.emplace_back("predicted");
  for (std::size_t i = 0; i < n; ++i) {
    auto row = coord_cells(s.grid[i]);
    row.push_back(format_cell(resid[static_cast<Eigen::Index>(i)]));
    row.push_back(format_cell(pred[static_cast<Eigen::Index>(i)]));
    rt.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(rt));

  // Global surrogate: collocation with the rank-one kernel xi(x) xi(y).
  const auto sur = solve(make_problem(s.system, lambda, KernelMixture::single(rank_one_kernel(ev)),
                                      s.grid, s.penalties));
  solution_metrics(r.metrics, sur, "surrogate_");
  const Vec sphi = evaluate(sur, s.grid);
  const Vec sres = residual_field(sur, s.grid);
  r.metrics.add("surrogate_mean_abs_phi", sphi.cwiseAbs().mean());
  r.metrics.add("surrogate_mean_abs_residual", sres.cwiseAbs().mean());
  r.metrics.add("surrogate_residual_ratio", sres.cwiseAbs().mean() / sphi.cwiseAbs().mean());
}

void run_mercer(const ExperimentConfig& c, Report& r) {
  const auto s = setup(c);
  const auto kernel = parse_kernel(c.kernel);
  const Mat K = gram(kernel, s.grid).values;
  const auto d = mercer_decompose(K, s.grid, uniform_weights(s.grid.size()));
  const auto n = d.eigenvalues.size();
  const auto k = std::min<Eigen::Index>(c.mercer_modes, n);

  r.metrics.add("kernel", kernel.describe());
  r.metrics.add("mu_1", d.eigenvalues[0]);
  r.metrics.add("mu_min_raw", d.raw_eigenvalues[n - 1]);
  r.metrics.add("trace", d.eigenvalues.sum());
  r.metrics.add("orthonormality_error", d.orthonormality_error());
  r.metrics.add("reconstruction_error", (d.reconstruct() - K).cwiseAbs().maxCoeff());
  r.metrics.add_bool("indefinite", d.indefinite);
  r.metrics.add_int("modes", k);
  for (const auto& w : d.warnings) r.warnings.push_back(w);

  Table sp;
  sp.artifact = "spectrum";
  sp.header = {"n", "mu"};
  for (Eigen::Index i = 0; i < n; ++i) sp.rows.push_back({std::to_string(i + 1), format_cell(d.eigenvalues[i])});
  r.tables.push_back(std::move(sp));

  Table md;
  md.artifact = "modes";
  md.header = s.coords;
  for (Eigen::Index j = 0; j < k; ++j) md.header.push_back(fmt::format("psi_{}", j + 1));
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    auto row = coord_cells(s.grid[i]);
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(format_cell(d.modes(static_cast<Eigen::Index>(i), j)));
    md.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(md));
}

void run_unify(const ExperimentConfig& c, Report& r) {
  AdvectionProblem p;
  p.c = c.unify_c;
  p.lambda = c.unify_lambda;
  p.a = c.unify_a;
  p.b = c.unify_hi;
  const auto q = QuadratureRule::gauss_legendre(p.a, p.b, c.quad_panels, c.quad_order);
  const auto grid = linspace(c.unify_lo, c.unify_hi, c.unify_n);
  const auto rep = unification_check(p, grid, q);

  r.metrics.add("c", p.c);
  r.metrics.add("lambda", p.lambda);
  r.metrics.add("a", p.a);
  r.metrics.add("alpha", rep.alpha);
  r.metrics.add_int("quadrature_nodes", static_cast<long long>(q.size()));
  r.metrics.add("scale_green", rep.scale_green);
  r.metrics.add("scale_resolvent", rep.scale_resolvent);
  r.metrics.add("max_rel_dev", rep.max_rel_dev);
  r.metrics.add("max_diagonal_dev", rep.max_diagonal_dev);

  Table t;
  t.artifact = "unify";
  t.header = {"x", "y", "K_green", "K_analytic", "K_resolvent_sym", "rel_dev"};
  for (const auto& row : rep.rows)
    t.rows.push_back({format_cell(row.x), format_cell(row.y), format_cell(row.k_green),
                      format_cell(row.k_analytic), format_cell(row.k_resolvent_sym),
                      format_cell(row.rel_dev)});
  r.tables.push_back(std::move(t));
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Report r;
  r.config = cfg;
  r.metrics.add_int("schema_version", kSchemaVersion);
  r.metrics.add_int("defaults_version", kDefaultsVersion);
  r.metrics.add("experiment", cfg.name);
  r.metrics.add("kind", cfg.kind);
  r.metrics.add("system", cfg.kind == "unify" ? std::string("advection1d") : cfg.system);
  r.metrics.add("seed", std::to_string(cfg.seed));
  if (cfg.kind != "unify") {
    long long points = 1;
    for (int n : cfg.counts) points *= n;
    r.metrics.add_int("n_points", points);
  }

  if (cfg.kind == "solve") run_solve(cfg, r);
  else if (cfg.kind == "mkl") run_mkl(cfg, r);
  else if (cfg.kind == "path-integral") run_path_integral(cfg, r);
  else if (cfg.kind == "mercer") run_mercer(cfg, r);
  else run_unify(cfg, r);

  r.metrics.add_int("warnings", static_cast<long long>(r.warnings.size()));
  for (std::size_t i = 0; i < r.warnings.size(); ++i)
    r.metrics.add(fmt::format("warning_{}", i + 1), r.warnings[i]);
  return r;
}

std::string render_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

std::string render_metrics(const Metrics& m) {
  std::string out;
  for (const auto& [k, v] : m.entries()) out += k + '=' + v + '\n';
  return out;
}

}  // namespace koopkern::cli
