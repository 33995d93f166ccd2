#include "koopkern/dynamics.hpp"
#include "koopkern/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace koopkern {

SystemPtr make_cubic1d() {
  auto field = [](const Vec& x) {
    Vec v(1);
    v[0] = x[0] - x[0] * x[0] * x[0];
    return v;
  };
  auto jac = [](const Vec& x) {
    Mat J(1, 1);
    J(0, 0) = 1.0 - 3.0 * x[0] * x[0];
    return J;
  };
  ReferenceEigenpair ref{1.0,
                         [](const Vec& x) {
                           const double s = 1.0 - x[0] * x[0];
                           if (!(s > 0.0))
                             throw DomainError(
                                 "cubic1d eigenfunction needs |x| < 1");
                           return x[0] / std::sqrt(s);
                         },
                         "x/sqrt(1-x^2)"};
  return std::make_shared<const SystemDef>(
      "cubic1d", 1, field, Vec::Zero(1), Params{}, jac,
      std::vector<ReferenceEigenpair>{ref});
}

// Conjugate to the linear system y' = diag(l1, l2) y through
// y1 = x1 - x2^2, y2 = x2 - y1^2.
SystemPtr make_poly2d(double lambda1, double lambda2) {
  auto field = [lambda1, lambda2](const Vec& x) {
    const double y1 = x[0] - x[1] * x[1];
    const double y2 = x[1] - y1 * y1;
    Vec v(2);
    v[1] = lambda2 * y2 + 2.0 * lambda1 * y1 * y1;
    v[0] = lambda1 * y1 + 2.0 * x[1] * v[1];
    return v;
  };
  auto jac = [lambda1, lambda2](const Vec& x) {
    const double y1 = x[0] - x[1] * x[1];
    const double y2 = x[1] - y1 * y1;
    const double f2 = lambda2 * y2 + 2.0 * lambda1 * y1 * y1;
    Eigen::RowVector2d dy1(1.0, -2.0 * x[1]);
    Eigen::RowVector2d dy2 = Eigen::RowVector2d(0.0, 1.0) - 2.0 * y1 * dy1;
    Eigen::RowVector2d df2 = lambda2 * dy2 + 4.0 * lambda1 * y1 * dy1;
    Eigen::RowVector2d df1 =
        lambda1 * dy1 + 2.0 * x[1] * df2 + Eigen::RowVector2d(0.0, 2.0 * f2);
    Mat J(2, 2);
    J.row(0) = df1;
    J.row(1) = df2;
    return J;
  };
  std::vector<ReferenceEigenpair> refs{
      {lambda1, [](const Vec& x) { return x[0] - x[1] * x[1]; }, "x1-x2^2"},
      {lambda2,
       [](const Vec& x) {
         const double y1 = x[0] - x[1] * x[1];
         return x[1] - y1 * y1;
       },
       "x2-(x1-x2^2)^2"}};
  return std::make_shared<const SystemDef>(
      "poly2d", 2, field, Vec::Zero(2),
      Params{{"lambda1", lambda1}, {"lambda2", lambda2}}, jac, std::move(refs));
}

SystemPtr make_duffing(double delta, double beta, double alpha) {
  auto field = [delta, beta, alpha](const Vec& x) {
    Vec v(2);
    v[0] = x[1];
    v[1] = -delta * x[1] - x[0] * (beta + alpha * x[0] * x[0]);
    return v;
  };
  auto jac = [delta, beta, alpha](const Vec& x) {
    Mat J(2, 2);
    J << 0.0, 1.0, -(beta + 3.0 * alpha * x[0] * x[0]), -delta;
    return J;
  };
  return std::make_shared<const SystemDef>(
      "duffing", 2, field, Vec::Zero(2),
      Params{{"delta", delta}, {"beta", beta}, {"alpha", alpha}}, jac);
}

SystemPtr make_advection1d(double c) {
  if (c == 0.0 || !std::isfinite(c))
    throw ContractViolation("advection1d: speed c must be finite and nonzero");
  auto field = [c](const Vec&) {
    Vec v(1);
    v[0] = c;
    return v;
  };
  auto jac = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  return std::make_shared<const SystemDef>(
      "advection1d", 1, field, std::nullopt, Params{{"c", c}}, jac);
}

SystemPtr make_linear_test(double a, double b) {
  auto field = [a, b](const Vec& x) {
    Vec v(2);
    v[0] = a * x[0];
    v[1] = b * x[1];
    return v;
  };
  auto jac = [a, b](const Vec&) {
    Mat J = Mat::Zero(2, 2);
    J(0, 0) = a;
    J(1, 1) = b;
    return J;
  };
  std::vector<ReferenceEigenpair> refs{
      {a, [](const Vec& x) { return x[0]; }, "x1"},
      {b, [](const Vec& x) { return x[1]; }, "x2"}};
  return std::make_shared<const SystemDef>(
      "linear_test", 2, field, Vec::Zero(2), Params{{"a", a}, {"b", b}}, jac,
      std::move(refs));
}

SystemPtr make_custom_system(std::string name, int dim, SystemDef::Field field,
                             std::optional<Vec> equilibrium) {
  return std::make_shared<const SystemDef>(std::move(name), dim,
                                           std::move(field),
                                           std::move(equilibrium));
}

std::vector<std::string> builtin_system_names() {
  return {"cubic1d", "poly2d", "duffing", "advection1d(c)", "linear_test(a,b)"};
}

namespace {

double parse_number(const std::string& text, const std::string& context) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw ContractViolation(
        fmt::format("{}: '{}' is not a finite number", context, text));
  return v;
}

}  // namespace

SystemPtr make_system(const std::string& name, const Params& overrides) {
  std::string base = name;
  std::vector<double> positional;
  if (const auto open = name.find('('); open != std::string::npos) {
    if (name.back() != ')')
      throw ContractViolation("malformed system name '" + name + "'");
    base = name.substr(0, open);
    std::stringstream args(name.substr(open + 1, name.size() - open - 2));
    std::string item;
    while (std::getline(args, item, ','))
      positional.push_back(parse_number(item, "system '" + name + "'"));
  }

  struct Slot {
    const char* key;
    double value;
  };
  std::vector<Slot> slots;
  if (base == "cubic1d") {
  } else if (base == "poly2d") {
    slots = {{"lambda1", -1.0}, {"lambda2", 3.0}};
  } else if (base == "duffing") {
    slots = {{"delta", 0.5}, {"beta", -1.0}, {"alpha", 1.0}};
  } else if (base == "advection1d") {
    slots = {{"c", 1.0}};
  } else if (base == "linear_test") {
    slots = {{"a", -1.0}, {"b", 2.0}};
  } else {
    throw ContractViolation("unknown system '" + name + "'");
  }

  if (positional.size() > slots.size())
    throw ContractViolation(fmt::format("system '{}' takes at most {} arguments",
                                        base, slots.size()));
  for (std::size_t i = 0; i < positional.size(); ++i)
    slots[i].value = positional[i];
  for (const auto& [key, value] : overrides) {
    bool found = false;
    for (auto& s : slots)
      if (key == s.key) {
        s.value = value;
        found = true;
      }
    if (!found)
      throw ContractViolation(
          fmt::format("system '{}' has no parameter '{}'", base, key));
  }

  if (base == "cubic1d") return make_cubic1d();
  if (base == "poly2d") return make_poly2d(slots[0].value, slots[1].value);
  if (base == "duffing")
    return make_duffing(slots[0].value, slots[1].value, slots[2].value);
  if (base == "advection1d") return make_advection1d(slots[0].value);
  return make_linear_test(slots[0].value, slots[1].value);
}

}  // namespace koopkern
