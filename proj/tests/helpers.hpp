#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>

// shared assertion helpers for the doctest suites

namespace testing_detail {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

inline double cplx_dist(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b);
}

// runs fn, returns the caught message (empty marker strings otherwise) so a
// test can assert on the kebab-case error-name prefix
template <class E>
std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  } catch (...) {
    return "<different-exception-type>";
  }
  return "<no-throw>";
}

inline bool has_prefix(const std::string& msg, const std::string& prefix) {
  return msg.rfind(prefix, 0) == 0;
}

} // namespace testing_detail
