#include "surveykit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace surveykit {

LinearSolve3 solve3(const Matrix3& a_in, const Vector3& b_in, double tol) {
    Matrix3 a = a_in;
    Vector3 b = b_in;
    LinearSolve3 out;

    for (int i = 0; i < 3; ++i) {
        double scale = 0.0;
        for (double v : a[i]) scale = std::max(scale, std::abs(v));
        if (scale == 0.0 || !std::isfinite(scale)) {
            out.singular = true;
            return out;
        }
        for (double& v : a[i]) v /= scale;
        b[i] /= scale;
    }

    double max_pivot = 0.0;
    double min_pivot = INFINITY;
    for (int k = 0; k < 3; ++k) {
        int p = k;
        for (int i = k + 1; i < 3; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        }
        if (p != k) {
            std::swap(a[p], a[k]);
            std::swap(b[p], b[k]);
        }
        const double pivot = std::abs(a[k][k]);
        max_pivot = std::max(max_pivot, pivot);
        min_pivot = std::min(min_pivot, pivot);
        if (pivot < tol) {
            out.singular = true;
            return out;
        }
        for (int i = k + 1; i < 3; ++i) {
            const double factor = a[i][k] / a[k][k];
            if (factor == 0.0) continue;
            for (int j = k; j < 3; ++j) a[i][j] -= factor * a[k][j];
            b[i] -= factor * b[k];
        }
    }

    for (int i = 2; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < 3; ++j) s -= a[i][j] * out.x[j];
        out.x[i] = s / a[i][i];
    }
    out.condition_estimate = max_pivot / min_pivot;
    return out;
}

}  // namespace surveykit
