#include "dcal/link.hpp"

#include <cmath>

#include "dcal/errors.hpp"
#include "dcal/math_util.hpp"

namespace dcal {

const Link& Link::identity() {
  static const Link l{Kind::identity,
                      [](double t) { return t; },
                      [](double) { return 1.0; },
                      [](double) { return 0.0; },
                      [](double u) { return u; }};
  return l;
}

const Link& Link::logistic() {
  static const Link l{Kind::logistic, [](double t) { return expit(t); },
                      [](double t) {
                        const double e = std::exp(-std::abs(t));
                        const double d = 1.0 + e;
                        return e / (d * d);
                      },
                      [](double t) {
                        const double v = expit(t);
                        return v * (1.0 - v) * (1.0 - 2.0 * v);
                      },
                      [](double u) { return logit(u); }};
  return l;
}

const Link& Link::probit() {
  static const Link l{Kind::probit, [](double t) { return norm_cdf(t); },
                      [](double t) { return norm_pdf(t); },
                      [](double t) { return -t * norm_pdf(t); },
                      [](double u) { return norm_quantile(u); }};
  return l;
}

Link Link::custom(std::function<double(double)> value, std::function<double(double)> deriv,
                  std::function<double(double)> deriv2, std::function<double(double)> inverse) {
  return Link{Kind::custom, std::move(value), std::move(deriv), std::move(deriv2),
              std::move(inverse)};
}

const Link& Link::by_name(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "logistic") return logistic();
  if (name == "probit") return probit();
  throw invalid_config_error("unknown link '" + name + "' (expected identity|logistic|probit)");
}

const char* Link::name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::logistic: return "logistic";
    case Kind::probit: return "probit";
    default: return "custom";
  }
}

Eigen::VectorXd eval_link_vector(const Link& link, const Eigen::VectorXd& eta) {
  if (!eta.allFinite()) throw numeric_error("eval_link_vector: non-finite input");
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = link.value(eta[i]);
  return out;
}

}  // namespace dcal
