#pragma once

#include "sgt/dirichlet.hpp"
#include "sgt/mc.hpp"
#include "sgt/params.hpp"

namespace sgt::dirichlet {

// Periodic heat-trace weight W(T, u) = sum_n exp(-(2 pi n / beta)^2 T / 2)
// cos(2 pi n u / beta); evaluated through whichever dual theta sum converges
// fast, truncated when the next term drops below 1e-14 of the partial sum.
double theta_weight(double beta, double T, double u);

struct BridgeEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long long samples = 0;
    bool precision_warning = false;
    double rejection_rate = 0.0;
};

// Path-sampling estimate of
//   (1/(2 beta)) int_0^inf dT e^{-m^2 T/2} W(T,u)
//        int dmu_{x,y}^T  prod_{i in touch}(1 - J_i) prod_{j in avoid} J_j,
// the Wiener representation of the thermal covariance with touch/avoid
// constraints on integer levels. T is drawn from the exponential proposal at
// rate m^2/2, the bridge skeleton from the exact conditional Gaussians, and
// each level crossing from the exact bridge-minimum law per segment.
BridgeEstimate bridge_estimator(const ThermalParams& p, const BondSet& touch,
                                const BondSet& avoid, double u, double x, double y,
                                const McConfig& cfg);

}  // namespace sgt::dirichlet
