#include <algorithm>
#include <cmath>
#include <numeric>

#include "ignn/wellposed.hpp"

namespace ignn {
namespace {

double l1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

double soft_threshold_sum(std::span<const double> v, double theta) {
    double s = 0.0;
    for (double x : v) s += std::max(std::fabs(x) - theta, 0.0);
    return s;
}

}  // namespace

void l1_ball_project_inplace(std::span<double> v, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("l1_ball_project: radius must be >= 0");
    if (std::isinf(r) || l1(v) <= r) return;
    if (r == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    std::vector<double> mags(v.size());
    std::transform(v.begin(), v.end(), mags.begin(), [](double x) { return std::fabs(x); });
    std::stable_sort(mags.begin(), mags.end(), std::greater<>());

    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < mags.size(); ++j) {
        cumulative += mags[j];
        const double candidate = (cumulative - r) / static_cast<double>(j + 1);
        if (mags[j] - candidate > 0.0) theta = candidate;
    }
    // Rounding can leave the result a few ulps outside the ball; nudge theta
    // up until the exact same l1 sum used above reports it inside.
    const double support = std::count_if(mags.begin(), mags.end(), [&](double m) { return m > theta; });
    for (int k = 0; k < 4 && soft_threshold_sum(v, theta) > r; ++k) {
        theta += (soft_threshold_sum(v, theta) - r) / std::max(1.0, support);
    }
    while (soft_threshold_sum(v, theta) > r) theta = std::nextafter(theta, std::numeric_limits<double>::infinity());

    for (double& x : v) {
        const double shrunk = std::max(std::fabs(x) - theta, 0.0);
        x = std::copysign(shrunk, x);
        if (shrunk == 0.0) x = 0.0;
    }
}

std::vector<double> l1_ball_project(std::span<const double> v, double r) {
    std::vector<double> out(v.begin(), v.end());
    l1_ball_project_inplace(out, r);
    return out;
}

DenseMatrix project_W(const DenseMatrix& W, double radius) {
    if (!(radius >= 0.0)) throw std::invalid_argument("project_W: radius must be >= 0");
    DenseMatrix out = W;
    if (std::isinf(radius)) return out;
    const auto rows = static_cast<std::ptrdiff_t>(W.rows());
#pragma omp parallel for schedule(static) if (W.size() > 4096)
    for (std::ptrdiff_t i = 0; i < rows; ++i) l1_ball_project_inplace(out.row(static_cast<std::size_t>(i)), radius);
    return out;
}

DenseMatrix project_W(const DenseMatrix& W, const ConstraintSpec& spec) { return project_W(W, spec.radius); }

std::vector<DenseMatrix> project_relations(const std::vector<DenseMatrix>& Ws, const ConstraintSpec& spec) {
    std::vector<DenseMatrix> out;
    if (spec.relation_radii.empty()) {
        if (Ws.size() != 1) throw std::invalid_argument("project_relations: constraint has no per-relation radii");
        out.push_back(project_W(Ws.front(), spec.radius));
        return out;
    }
    if (spec.relation_radii.size() != Ws.size()) throw std::invalid_argument("project_relations: radius count mismatch");
    for (std::size_t i = 0; i < Ws.size(); ++i) out.push_back(project_W(Ws[i], spec.relation_radii[i]));
    return out;
}

}  // namespace ignn
