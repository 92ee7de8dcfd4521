#ifndef MOCM_LINALG_HPP
#define MOCM_LINALG_HPP

#include <Eigen/Dense>

namespace mocm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace mocm

#endif  // MOCM_LINALG_HPP
