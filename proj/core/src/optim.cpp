#include "capg/optim.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "capg/format.hpp"

namespace capg {

AdamState AdamState::zeros(std::size_t num_params, AdamHyper hyper) {
  AdamState s;
  s.first_moment.assign(num_params, 0.0);
  s.second_moment.assign(num_params, 0.0);
  s.hyper = hyper;
  return s;
}

AdamUpdate adam_step(const AdamState& state, std::span<const double> params,
                     std::span<const double> gradient, Direction direction) {
  const std::size_t n = params.size();
  if (gradient.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw std::invalid_argument("adam_step: parameter, gradient and moment sizes differ");
  }
  for (const double g : gradient) {
    if (!std::isfinite(g)) throw std::invalid_argument("adam_step: non-finite gradient");
  }
  const AdamHyper& h = state.hyper;
  AdamUpdate out{state, std::vector<double>(params.begin(), params.end())};
  out.state.step_count += 1;
  const double t = static_cast<double>(out.state.step_count);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  const double sign = direction == Direction::Ascend ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double& m = out.state.first_moment[i];
    double& v = out.state.second_moment[i];
    m = h.beta1 * m + (1.0 - h.beta1) * gradient[i];
    v = h.beta2 * v + (1.0 - h.beta2) * gradient[i] * gradient[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    out.params[i] += sign * h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
  return out;
}

void write_adam_state(std::ostream& os, const AdamState& state) {
  os << "adam " << state.step_count << ' ' << format_real(state.hyper.lr) << ' '
     << format_real(state.hyper.beta1) << ' ' << format_real(state.hyper.beta2) << ' '
     << format_real(state.hyper.epsilon) << ' ' << state.first_moment.size() << '\n';
  for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
    os << format_real(state.first_moment[i]) << ' ' << format_real(state.second_moment[i]) << '\n';
  }
}

AdamState read_adam_state(std::istream& is) {
  std::string tag;
  std::string lr, b1, b2, eps;
  std::size_t n = 0;
  AdamState s;
  if (!(is >> tag >> s.step_count >> lr >> b1 >> b2 >> eps >> n) || tag != "adam") {
    throw std::runtime_error("read_adam_state: malformed header");
  }
  s.hyper = {parse_real(lr), parse_real(b1), parse_real(b2), parse_real(eps)};
  s.first_moment.resize(n);
  s.second_moment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string m, v;
    if (!(is >> m >> v)) throw std::runtime_error("read_adam_state: truncated moments");
    s.first_moment[i] = parse_real(m);
    s.second_moment[i] = parse_real(v);
  }
  return s;
}

}  // namespace capg
