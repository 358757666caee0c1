#include "nirom/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nirom/csv.hpp"
#include "nirom/errors.hpp"
#include "nirom/sampling.hpp"

namespace nirom {

namespace {

class Evaluator {
 public:
  Evaluator(const std::function<double(const Vector&)>& f, const ParameterBox& box, std::size_t budget,
            OptimizeResult& out)
      : f_(f), box_(box), budget_(budget), out_(out) {}

  bool exhausted() const { return out_.evaluations >= budget_; }

  double operator()(const Vector& x) {
    const Vector p = box_.clamp(x);
    const double v = f_(p);
    if (!std::isfinite(v)) throw NumericError("optimize: non-finite surrogate value at " + io::format_vector(p));
    ++out_.evaluations;
    if (out_.trace.empty() || v < out_.value) {
      out_.value = v;
      out_.argmin = p;
    }
    out_.trace.push_back({out_.evaluations, p, v, out_.value});
    return v;
  }

 private:
  const std::function<double(const Vector&)>& f_;
  const ParameterBox& box_;
  std::size_t budget_;
  OptimizeResult& out_;
};

void nelder_mead(Evaluator& eval, const ParameterBox& box, const Vector& start, double scale) {
  const Eigen::Index n = start.size();
  std::vector<Vector> simplex{start};
  std::vector<double> values;
  values.push_back(eval(start));
  const Vector width = box.upper() - box.lower();
  for (Eigen::Index i = 0; i < n && !eval.exhausted(); ++i) {
    Vector v = start;
    // step inward so the vertex stays in the box
    const double step = scale * width[i];
    v[i] += (v[i] + step <= box.upper()[i]) ? step : -step;
    simplex.push_back(v);
    values.push_back(eval(v));
  }
  if (simplex.size() < static_cast<std::size_t>(n + 1)) return;

  std::vector<std::size_t> order(simplex.size());
  while (!eval.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    double spread = 0.0;
    for (const auto& v : simplex) spread = std::max(spread, (v - simplex[best]).cwiseAbs().maxCoeff());
    if (spread <= 1e-14 * std::max(1.0, width.maxCoeff())) return;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Vector reflected = box.clamp(centroid + (centroid - simplex[worst]));
    const double fr = eval(reflected);
    if (fr < values[best]) {
      if (eval.exhausted()) return;
      const Vector expanded = box.clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    if (eval.exhausted()) return;
    const bool outside = fr < values[worst];
    const Vector contracted =
        outside ? Vector(centroid + 0.5 * (reflected - centroid)) : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size() && !eval.exhausted(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
}

}  // namespace

OptimizeResult optimize(const std::function<double(const Vector&)>& f, const ParameterBox& box, std::size_t budget,
                        std::uint64_t seed) {
  if (budget < 10) throw DomainError("optimize: budget must be at least 10");
  OptimizeResult out;
  Evaluator eval(f, box, budget, out);
  const std::size_t screen = budget / 2;
  for (const Vector& u : halton_unit(screen, box.dim(), halton_offset(seed)))
    eval(box.lower().array() + u.array() * (box.upper() - box.lower()).array());
  // restart with a smaller simplex whenever the previous one collapses
  for (double scale = 0.1; !eval.exhausted() && scale > 1e-12; scale *= 0.1) {
    const Vector start = out.argmin;
    nelder_mead(eval, box, start, scale);
  }
  return out;
}

}  // namespace nirom
