#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace dcal {

// A twice-differentiable link with its inverse. PS links are monotone
// increasing with range (0,1); the OR link may be the identity.
struct Link {
  enum class Kind { identity, logistic, probit, custom };

  Kind kind = Kind::identity;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
  std::function<double(double)> inverse;

  static const Link& identity();
  static const Link& logistic();
  static const Link& probit();
  static Link custom(std::function<double(double)> value, std::function<double(double)> deriv,
                     std::function<double(double)> deriv2,
                     std::function<double(double)> inverse);

  static const Link& by_name(const std::string& name);  // "identity" | "logistic" | "probit"
  const char* name() const;
};

// Elementwise value(); rejects non-finite input.
Eigen::VectorXd eval_link_vector(const Link& link, const Eigen::VectorXd& eta);

}  // namespace dcal
