#pragma once

namespace tkgmlp {

double sigmoid(double x);

// Sigmoid linear unit, x * sigmoid(x).
double silu(double x);

// d/dx silu(x) = sigmoid(x) * (1 + x * (1 - sigmoid(x))).
double silu_derivative(double x);

}  // namespace tkgmlp
