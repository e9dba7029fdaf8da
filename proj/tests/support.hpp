#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "mrules/problem.hpp"

namespace testing {

inline std::vector<std::filesystem::path> catalog_problems() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(MRULES_CATALOG_DIR))
    if (e.path().extension() == ".problem") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::filesystem::path catalog(const std::string& name) {
  return std::filesystem::path(MRULES_CATALOG_DIR) / (name + ".problem");
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MRULES_FIXTURE_DIR) / name;
}

inline mrules::InequalityProblem inequality(
    std::vector<std::string> vars, const std::string& objective,
    const std::vector<std::string>& ineq) {
  std::vector<mrules::ScalarField> g;
  for (const auto& s : ineq) g.push_back(mrules::ScalarField::parse(s, vars));
  const std::size_t n = vars.size();
  auto f = mrules::ScalarField::parse(objective, vars);
  return {std::move(vars), std::move(f), std::move(g),
          mrules::DomainBox::unbounded(n)};
}

inline mrules::MixedProblem mixed(std::vector<std::string> vars,
                                  const std::string& objective,
                                  const std::vector<std::string>& ineq,
                                  const std::vector<std::string>& eq) {
  std::vector<mrules::ScalarField> g, h;
  for (const auto& s : ineq) g.push_back(mrules::ScalarField::parse(s, vars));
  for (const auto& s : eq) h.push_back(mrules::ScalarField::parse(s, vars));
  const std::size_t n = vars.size();
  auto f = mrules::ScalarField::parse(objective, vars);
  return {std::move(vars), std::move(f), std::move(g), std::move(h),
          mrules::DomainBox::unbounded(n)};
}

}  // namespace testing

#include <cmath>
#include <span>
#include <sstream>

namespace testing {

/// Central differences with a fixed step; independent of the engine's
/// one-sided Richardson estimator.
inline mrules::Vector central_gradient(const mrules::ScalarField& f,
                                       std::span<const double> x,
                                       double step = 1e-6) {
  mrules::Vector g(x.size());
  mrules::Vector p(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + step;
    const double up = f(p);
    p[i] = keep - step;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Re-verifies nontriviality, exact complementary slackness and stationarity
/// of raw (‖·‖₁ = 1) multipliers. Empty string when sound.
inline std::string certificate_failure(const mrules::ProblemView& p,
                                       std::span<const double> x,
                                       std::span<const double> lambda,
                                       std::span<const double> mu,
                                       double tau_stat, double tau_act) {
  std::ostringstream why;
  double l1 = 0.0;
  for (double v : lambda) l1 += std::abs(v);
  for (double v : mu) l1 += std::abs(v);
  if (std::abs(l1 - 1.0) > 1e-12) why << "norm " << l1 << "; ";
  for (double v : lambda)
    if (v < 0.0) why << "negative lambda; ";
  if (lambda.size() != 1 + p.inequalities.size() ||
      mu.size() != p.equalities.size())
    return "wrong multiplier lengths";
  for (std::size_t i = 0; i < p.inequalities.size(); ++i) {
    const double g = p.inequalities[i](x);
    const double prod = lambda[1 + i] * g;
    if (prod != 0.0 && std::abs(g) > tau_act)
      why << "slackness " << i + 1 << " = " << prod << "; ";
  }
  mrules::Vector sum(x.size(), 0.0);
  auto add = [&](const mrules::ScalarField& f, double w) {
    if (w == 0.0) return;
    const mrules::Vector g = central_gradient(f, x);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w * g[k];
  };
  add(p.objective, lambda[0]);
  for (std::size_t i = 0; i < p.inequalities.size(); ++i)
    add(p.inequalities[i], lambda[1 + i]);
  for (std::size_t j = 0; j < p.equalities.size(); ++j) add(p.equalities[j], mu[j]);
  double rho = 0.0;
  for (double v : sum) rho = std::max(rho, std::abs(v));
  if (rho > tau_stat) why << "residual " << rho << "; ";
  return why.str();
}

}  // namespace testing
