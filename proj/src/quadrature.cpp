#include "sgt/quadrature.hpp"

#include <algorithm>

namespace sgt {

QuadResult gk_adaptive_fn(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_panels) {
    return gk_adaptive(f, a, b, abs_tol, max_panels);
}

}  // namespace sgt
