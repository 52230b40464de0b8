#ifndef CATGP_TEST_UTIL_HPP
#define CATGP_TEST_UTIL_HPP

#include <Eigen/Dense>

// Exact elementwise equality (shapes included) for Eigen types.
template <class A, class B>
bool exact_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

#endif
