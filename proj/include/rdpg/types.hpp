#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rdpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Block labels are stored zero-based; files and the CLI use 1..K.
using Labels = std::vector<int>;

enum class Method { Ase, Lse };

/// Dense: rho_n = 1. Vanishing: rho_n -> 0 with n rho_n = omega(log^4 n).
enum class RhoRegime { Dense, Vanishing };

std::string_view to_string(Method m);
std::string_view to_string(RhoRegime r);

}  // namespace rdpg
