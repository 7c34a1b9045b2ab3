#include "surveykit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "surveykit/error.hpp"
#include "surveykit/linalg.hpp"

namespace surveykit {

namespace {

// 1 - a - b with both subtractions carried exactly (TwoSum), rounded once.
double one_minus(double a, double b) {
    auto two_sum = [](double x, double y, double& err) {
        const double s = x + y;
        const double bp = s - x;
        err = (x - (s - bp)) + (y - bp);
        return s;
    };
    double e1, e2;
    const double s1 = two_sum(1.0, -a, e1);
    const double s2 = two_sum(s1, -b, e2);
    return s2 + (e1 + e2);
}

WeightSolution solve_system(double slope1, double slope2, double bias1, double bias2, double Kx) {
    const Matrix3 a{{{1.0, 1.0, 1.0}, {0.0, slope1, slope2}, {0.0, bias1, bias2}}};
    const auto solved = solve3(a, Vector3{1.0, Kx, 0.0});
    if (solved.singular) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "weight system is singular; slope row [0, " << slope1 << ", " << slope2 << "], bias row [0, "
            << bias1 << ", " << bias2 << "]";
        throw Error(ErrorCode::SingularSystem, msg.str());
    }

    WeightSolution out;
    out.w = solved.x;
    // Row 1 only fixes w0 = 1 - w1 - w2; take it with an error-free sum so
    // the stored weights add up to 1 as closely as doubles allow.
    out.w[0] = one_minus(out.w[1], out.w[2]);
    out.residual_sum = std::abs(out.w[0] + out.w[1] + out.w[2] - 1.0);
    out.residual_opt = std::abs(out.w[1] * slope1 + out.w[2] * slope2 - Kx);
    out.residual_bias = std::abs(out.w[1] * bias1 + out.w[2] * bias2);
    out.condition_estimate = solved.condition_estimate;
    return out;
}

}  // namespace

WeightSolution solve_weights(const TheoryInput& in) {
    const double slope1 = in.cfg.alpha * in.shape.V1;
    const double slope2 = in.cfg.beta - in.cfg.lambda * in.shape.V2 / 2.0;
    return solve_system(slope1, slope2, theory_t1(in).bias, theory_t2(in).bias, in.moments.Kx);
}

WeightSolution solve_weights_two_phase(const TheoryInput& in) {
    const double slope1 = in.cfg.m * in.shape.R1;
    const double slope2 = in.cfg.q - in.cfg.gamma * in.shape.R2;
    return solve_system(slope1, slope2, theory_t1d(in).bias, theory_t2d(in).bias, in.moments.Kx);
}

}  // namespace surveykit
