#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "iwcv/error.hpp"
#include "iwcv/qp.hpp"

using namespace iwcv;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

bool feasible(const Vector& w, const BoxSumConstraints& c) {
    return w.minCoeff() >= 0.0 && w.maxCoeff() <= c.upper && w.sum() >= c.sum_low() && w.sum() <= c.sum_high();
}

Matrix random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
    std::normal_distribution<double> normal;
    Matrix a(n, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    return a * a.transpose();
}

/// Checks first-order optimality at w, allowing a single sum multiplier.
void expect_kkt(const Matrix& H, const Vector& f, const BoxSumConstraints& c, const Vector& w, double tol) {
    const Vector g = H * w - f;
    const double eps = 1e-7 * c.upper;
    std::vector<double> free_grad;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] > eps && w[i] < c.upper - eps) free_grad.push_back(g[i]);
    }
    double mu = 0.0;
    const bool sum_tight = std::abs(w.sum() - c.sum_low()) < 1e-6 || std::abs(w.sum() - c.sum_high()) < 1e-6;
    if (sum_tight && !free_grad.empty()) {
        std::nth_element(free_grad.begin(), free_grad.begin() + free_grad.size() / 2, free_grad.end());
        mu = -free_grad[free_grad.size() / 2];
    }
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double r = g[i] + mu;
        if (w[i] <= eps) {
            EXPECT_GE(r, -tol) << "coordinate " << i << " at lower bound";
        } else if (w[i] >= c.upper - eps) {
            EXPECT_LE(r, tol) << "coordinate " << i << " at upper bound";
        } else {
            EXPECT_NEAR(r, 0.0, tol) << "free coordinate " << i;
        }
    }
}

}  // namespace

TEST(ProjectBoxSum, InteriorPointUnchanged) {
    const BoxSumConstraints c{10.0, 3.0, 1.0};
    const Vector v = vec({1.0, 1.2, 0.9});
    EXPECT_EQ(project_box_sum(v, c), v);
}

TEST(ProjectBoxSum, ClipsToBox) {
    const BoxSumConstraints c{2.0, 2.0, 10.0};
    EXPECT_EQ(project_box_sum(vec({5.0, -1.0}), c), vec({2.0, 0.0}));
}

TEST(ProjectBoxSum, ShiftsOntoBand) {
    // sum must be <= 3: subtract a common shift of 1 from both coordinates
    const BoxSumConstraints c{10.0, 2.0, 1.0};
    const Vector w = project_box_sum(vec({3.0, 2.0}), c);
    EXPECT_NEAR(w[0], 2.0, 1e-9);
    EXPECT_NEAR(w[1], 1.0, 1e-9);
    EXPECT_LE(w.sum(), 3.0);
}

TEST(ProjectBoxSum, EmptySetIsArgumentError) {
    EXPECT_THROW(project_box_sum(vec({1.0, 1.0}), BoxSumConstraints{1.0, 10.0, 1.0}), ArgumentError);
}

TEST(ProjectBoxSum, PropertyFeasibleAndNearestAmongSamples) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 4.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 8);
        const double upper = 0.5 + 5 * unit(rng);
        const double target = unit(rng) * upper * static_cast<double>(n);
        const BoxSumConstraints c{upper, target, unit(rng) * 2.0};
        const Vector v = Vector::NullaryExpr(n, [&] { return normal(rng); });
        const Vector p = project_box_sum(v, c);
        ASSERT_TRUE(feasible(p, c));
        // No random feasible point is closer.
        for (int k = 0; k < 50; ++k) {
            const Vector q = project_box_sum(Vector::NullaryExpr(n, [&] { return normal(rng); }), c);
            EXPECT_LE((p - v).norm(), (q - v).norm() + 1e-9);
        }
    }
}

TEST(LargestEigenvalue, Diagonal) {
    Matrix h = Matrix::Zero(3, 3);
    h.diagonal() << 1.0, 7.0, 3.0;
    EXPECT_NEAR(largest_eigenvalue(h), 7.0, 1e-8);
}

TEST(SolveBoxSumQp, InteriorOptimumIsAllOnes) {
    const Eigen::Index n = 4;
    const BoxSumConstraints c{10.0, 4.0, 2.0};
    const auto r = solve_box_sum_qp(Matrix::Identity(n, n), Vector::Ones(n), c);
    EXPECT_LE((r.solution - Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SolveBoxSumQp, ClippedAtBox) {
    const auto r = solve_box_sum_qp(Matrix::Identity(1, 1), vec({5.0}), BoxSumConstraints{2.0, 1.0, 5.0});
    EXPECT_NEAR(r.solution[0], 2.0, 1e-12);
}

TEST(SolveBoxSumQp, NonConvergenceCarriesResidual) {
    std::mt19937_64 rng(3);
    const Matrix h = random_psd(rng, 30, 30);
    const Vector f = Vector::Constant(30, 50.0);
    QpOptions o;
    o.max_iterations = 1;
    o.tolerance = 1e-14;
    try {
        solve_box_sum_qp(h, f, BoxSumConstraints{100.0, 30.0, 30.0}, o);
        FAIL() << "expected EstimationError";
    } catch (const EstimationError& e) {
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(SolveBoxSumQp, PropertyFeasibleAndKkt) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 12);
        const Matrix h = random_psd(rng, n, 1 + static_cast<Eigen::Index>(rng() % n));
        const Vector f = Vector::NullaryExpr(n, [&] { return 4.0 * unit(rng) - 1.0; });
        const double upper = 1.0 + 4.0 * unit(rng);
        const BoxSumConstraints c{upper, static_cast<double>(n), static_cast<double>(n) * unit(rng) * 0.5};
        const auto r = solve_box_sum_qp(h, f, c);
        ASSERT_TRUE(feasible(r.solution, c)) << "trial " << t;
        EXPECT_LE(r.projected_gradient_norm, 1e-6 * std::max(1.0, f.cwiseAbs().maxCoeff()));
        expect_kkt(h, f, c, r.solution, 1e-4);
    }
}
