#include "dampchan/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace dampchan::optim {

namespace {

// GSL aborts on errors by default; every status here is checked explicitly.
void disable_gsl_abort() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

Eigen::Map<const Eigen::VectorXd> view(const gsl_vector* v) {
  return {gsl_vector_const_ptr(v, 0), static_cast<Eigen::Index>(v->size)};
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVector = std::unique_ptr<gsl_vector, VectorDeleter>;

GslVector to_gsl(const Eigen::VectorXd& x) {
  GslVector v(gsl_vector_alloc(static_cast<size_t>(x.size())));
  for (Eigen::Index i = 0; i < x.size(); ++i) gsl_vector_set(v.get(), static_cast<size_t>(i), x(i));
  return v;
}

double safe_value(double v) { return std::isfinite(v) ? v : GSL_POSINF; }

double simplex_f(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  return safe_value(f(Eigen::VectorXd(view(x))));
}

double fdf_f(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const DifferentiableObjective*>(params);
  return safe_value(f(Eigen::VectorXd(view(x)), nullptr));
}

void fdf_df(const gsl_vector* x, void* params, gsl_vector* g) {
  const auto& f = *static_cast<const DifferentiableObjective*>(params);
  Eigen::VectorXd grad(x->size);
  f(Eigen::VectorXd(view(x)), &grad);
  for (size_t i = 0; i < x->size; ++i) gsl_vector_set(g, i, grad(static_cast<Eigen::Index>(i)));
}

void fdf_fdf(const gsl_vector* x, void* params, double* value, gsl_vector* g) {
  const auto& f = *static_cast<const DifferentiableObjective*>(params);
  Eigen::VectorXd grad(x->size);
  *value = safe_value(f(Eigen::VectorXd(view(x)), &grad));
  for (size_t i = 0; i < x->size; ++i) gsl_vector_set(g, i, grad(static_cast<Eigen::Index>(i)));
}

}  // namespace

Result simplex_minimize(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                        const SimplexOptions& opts) {
  disable_gsl_abort();
  if (x0.size() != step.size() || x0.size() == 0) throw std::invalid_argument("simplex_minimize: bad sizes");
  const size_t n = static_cast<size_t>(x0.size());

  gsl_multimin_function fn;
  fn.n = n;
  fn.f = &simplex_f;
  fn.params = const_cast<Objective*>(&f);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  GslVector x = to_gsl(x0);
  GslVector ss = to_gsl(step);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

  Result res;
  res.status = Status::MaxIterations;
  for (res.iterations = 0; res.iterations < opts.max_iterations;) {
    ++res.iterations;
    const int rc = gsl_multimin_fminimizer_iterate(s.get());
    if (rc != GSL_SUCCESS) {
      res.status = Status::Stalled;
      break;
    }
    const double size = gsl_multimin_fminimizer_size(s.get());
    if (gsl_multimin_test_size(size, opts.size_tol) == GSL_SUCCESS) {
      res.status = Status::Converged;
      break;
    }
  }
  res.x = view(gsl_multimin_fminimizer_x(s.get()));
  res.value = gsl_multimin_fminimizer_minimum(s.get());
  return res;
}

Result bfgs_minimize(const DifferentiableObjective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts) {
  disable_gsl_abort();
  if (x0.size() == 0) throw std::invalid_argument("bfgs_minimize: empty start point");
  const size_t n = static_cast<size_t>(x0.size());

  gsl_multimin_function_fdf fn;
  fn.n = n;
  fn.f = &fdf_f;
  fn.df = &fdf_df;
  fn.fdf = &fdf_fdf;
  fn.params = const_cast<DifferentiableObjective*>(&f);

  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n), &gsl_multimin_fdfminimizer_free);
  GslVector x = to_gsl(x0);
  gsl_multimin_fdfminimizer_set(s.get(), &fn, x.get(), opts.initial_step, opts.line_tol);

  Result res;
  res.status = Status::MaxIterations;
  double previous = gsl_multimin_fdfminimizer_minimum(s.get());
  int quiet_steps = 0;
  for (res.iterations = 0; res.iterations < opts.max_iterations;) {
    ++res.iterations;
    const int rc = gsl_multimin_fdfminimizer_iterate(s.get());
    const double current = gsl_multimin_fdfminimizer_minimum(s.get());
    if (gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(s.get()), opts.grad_tol) == GSL_SUCCESS) {
      res.status = Status::Converged;
      break;
    }
    if (rc != GSL_SUCCESS) {
      res.status = Status::Stalled;
      break;
    }
    const double change = std::abs(previous - current);
    quiet_steps = change <= opts.rel_tol * std::max(std::abs(current), std::abs(previous)) ? quiet_steps + 1 : 0;
    previous = current;
    if (quiet_steps >= 3) {
      res.status = Status::Converged;
      break;
    }
  }
  res.x = view(gsl_multimin_fdfminimizer_x(s.get()));
  res.value = gsl_multimin_fdfminimizer_minimum(s.get());
  return res;
}

Result quasi_newton(const DifferentiableObjective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts,
                    int max_fallbacks) {
  const Objective plain = [&f](const Eigen::VectorXd& x) { return f(x, nullptr); };
  Result best = bfgs_minimize(f, x0, opts);
  int total_iterations = best.iterations;
  for (int round = 0; round < max_fallbacks && best.status == Status::Stalled; ++round) {
    const Eigen::VectorXd step = (best.x.cwiseAbs() * 1e-3).cwiseMax(1e-4);
    const Result simplex = simplex_minimize(plain, best.x, step, {.max_iterations = 2000, .size_tol = 1e-9});
    total_iterations += simplex.iterations;
    if (!(simplex.value < best.value - opts.rel_tol * std::abs(best.value))) {
      // Nothing better nearby: the line search stalled at the noise floor.
      best.status = Status::Converged;
      break;
    }
    best = bfgs_minimize(f, simplex.x, opts);
    total_iterations += best.iterations;
  }
  best.iterations = total_iterations;
  return best;
}

Eigen::VectorXd finite_difference_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace dampchan::optim
