#include "cdgnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "cdgnet/errors.hpp"

namespace cdg {

namespace {

double evaluate(const std::function<Tensor<double>()>& f, const std::string& name) {
  NoGradGuard guard;
  const double v = f().item();
  if (!std::isfinite(v))
    throw NumericError(name, "grad_check: non-finite function value while probing '" + name + "'");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor<double>()>& f,
                           const std::vector<GradCheckInput>& inputs,
                           const GradCheckOptions& opts) {
  if (!(opts.eps >= 1e-6 && opts.eps <= 1e-3))
    throw ContractError("grad_check: eps must lie in [1e-6, 1e-3]");
  for (const auto& in : inputs) {
    Tensor<double> t = in.tensor;
    t.zero_grad();
    t.set_requires_grad(true);
  }
  const Tensor<double> loss = f();
  backward(loss);

  GradCheckReport report;
  for (const auto& in : inputs) {
    Tensor<double> t = in.tensor;
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (double g : analytic)
      if (!std::isfinite(g))
        throw NumericError(in.name, "grad_check: non-finite analytic gradient for '" + in.name + "'");
    auto data = t.mutable_data();
    const std::size_t count = data.size();
    const std::size_t stride =
        opts.max_probes == 0 || count <= opts.max_probes ? 1 : (count + opts.max_probes - 1) / opts.max_probes;
    for (std::size_t i = 0; i < count; i += stride) {
      const double saved = data[i];
      data[i] = saved + opts.eps;
      const double up = evaluate(f, in.name);
      data[i] = saved - opts.eps;
      const double down = evaluate(f, in.name);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      ++report.probes;
      if (report.worst_input.empty() || err > report.max_rel_err) {
        report.max_rel_err = err;
        report.worst_input = in.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace cdg
