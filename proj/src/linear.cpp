#include "demand/linear.hpp"

#include "demand/parallel.hpp"
#include "demand/rng.hpp"
#include "demand/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace demand {

namespace {

constexpr double k_cd_tol = 1e-7;       // max coefficient change per sweep
constexpr int k_cd_max_sweeps = 10000;
constexpr double k_tie_tol = 1e-12;

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

struct Centered {
    Matrix X;
    Vector y;
    Vector x_mean;
    double y_mean;
};

Centered center(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y) {
    Centered c;
    c.x_mean = X.colwise().mean().transpose();
    c.y_mean = y.mean();
    c.X = X.rowwise() - c.x_mean.transpose();
    c.y = (y.array() - c.y_mean).matrix();
    return c;
}

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0)) throw std::invalid_argument("lambda grid must be strictly positive");
        if (i > 0 && !(grid[i] < grid[i - 1]))
            throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
}

// Smallest lambda among ties within 1e-12 of the minimum CV error.
size_t select_lambda(const std::vector<double>& grid, const std::vector<double>& cv_rmse) {
    size_t best = 0;
    for (size_t i = 1; i < grid.size(); ++i) {
        if (cv_rmse[i] < cv_rmse[best] - k_tie_tol ||
            (std::abs(cv_rmse[i] - cv_rmse[best]) <= k_tie_tol && grid[i] < grid[best]))
            best = i;
    }
    return best;
}

std::vector<CvPoint> make_profile(const std::vector<double>& grid,
                                  const std::vector<double>& cv_rmse) {
    std::vector<CvPoint> out;
    out.reserve(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) out.push_back({grid[i], cv_rmse[i]});
    return out;
}

// Cyclic coordinate descent at a single lambda in covariance-update form:
// gram = Xc'Xc / n, grad = Xc'(yc - Xc beta) / n, both maintained by the
// caller across the warm-started path. Sweeps cost O(k * active) instead
// of O(n k).
int cd_solve(const Matrix& gram, const Vector& col_msq, Vector& beta, Vector& grad, double lambda) {
    const Index k = gram.cols();
    int sweeps = 0;
    std::vector<Index> active;
    bool full_pass = true;
    while (true) {
        if (++sweeps > k_cd_max_sweeps) {
            std::ostringstream msg;
            msg << "lasso coordinate descent failed to converge: lambda=" << lambda << ", sweeps="
                << sweeps;
            throw std::runtime_error(msg.str());
        }
        double max_change = 0.0;
        auto update = [&](Index j) {
            const double vj = col_msq[j];
            if (vj < 1e-300) return;
            const double old = beta[j];
            const double z = grad[j] + vj * old;
            const double nb = soft_threshold(z, lambda) / vj;
            if (nb != old) {
                grad.noalias() -= gram.col(j) * (nb - old);
                beta[j] = nb;
                max_change = std::max(max_change, std::abs(nb - old));
            }
        };
        if (full_pass) {
            for (Index j = 0; j < k; ++j) update(j);
            if (max_change < k_cd_tol) return sweeps;
            active.clear();
            for (Index j = 0; j < k; ++j)
                if (beta[j] != 0.0) active.push_back(j);
            full_pass = false;
        } else {
            for (Index j : active) update(j);
            if (max_change < k_cd_tol) full_pass = true;
        }
    }
}

Vector logistic_probs(const Vector& eta) {
    Vector p(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
        const double e = std::clamp(eta[i], -30.0, 30.0);
        p[i] = sigmoid(e);
    }
    return p;
}

double deviance(const Vector& p, const Eigen::Ref<const IntVector>& d) {
    double dev = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        const double pi = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
        dev -= 2.0 * (d[i] == 1 ? std::log(pi) : std::log(1.0 - pi));
    }
    return dev;
}

}  // namespace

std::vector<int> fold_assignment(Index n, int folds, uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    if (n < folds) throw std::invalid_argument("fewer rows than folds");
    std::vector<Index> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(mix_seed(seed, 0x0f01d5));
    rng.shuffle(perm);
    std::vector<int> fold(static_cast<size_t>(n));
    for (size_t i = 0; i < perm.size(); ++i)
        fold[static_cast<size_t>(perm[i])] = static_cast<int>(i % static_cast<size_t>(folds));
    return fold;
}

Vector ols_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("ols_fit: size mismatch");
    if (X.rows() < X.cols()) throw std::invalid_argument("ols_fit: fewer rows than columns");
    Eigen::HouseholderQR<Matrix> qr(X);
    const auto& r = qr.matrixQR();
    double max_diag = 0.0;
    for (Index j = 0; j < X.cols(); ++j) max_diag = std::max(max_diag, std::abs(r(j, j)));
    for (Index j = 0; j < X.cols(); ++j) {
        if (std::abs(r(j, j)) <= 1e-10 * max_diag)
            throw std::runtime_error(
                "ols_fit: design is rank deficient; rebuild the design so collinear columns are "
                "dropped");
    }
    return qr.solve(y);
}

LinearFit ridge_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                    double lambda) {
    if (!(lambda >= 0)) throw std::invalid_argument("ridge_fit: lambda must be nonnegative");
    Centered c = center(X, y);
    Matrix g = c.X.transpose() * c.X;
    g.diagonal().array() += lambda;
    LinearFit fit;
    fit.coef = g.ldlt().solve(c.X.transpose() * c.y);
    fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
    fit.lambda = lambda;
    return fit;
}

LinearFit ridge_cv(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                   const std::vector<double>& lambda_grid, int folds, uint64_t seed) {
    validate_grid(lambda_grid);
    const Index n = X.rows();
    const Index k = X.cols();
    const auto fold = fold_assignment(n, folds, seed);

    // Per-fold sufficient statistics so each training Gram is a subtraction.
    std::vector<Matrix> s_fold(static_cast<size_t>(folds), Matrix::Zero(k, k));
    std::vector<Vector> t_fold(static_cast<size_t>(folds), Vector::Zero(k));
    std::vector<Vector> u_fold(static_cast<size_t>(folds), Vector::Zero(k));
    std::vector<double> sy_fold(static_cast<size_t>(folds), 0.0);
    std::vector<Index> n_fold(static_cast<size_t>(folds), 0);
    std::vector<std::vector<Index>> rows_of(static_cast<size_t>(folds));
    for (Index i = 0; i < n; ++i) rows_of[static_cast<size_t>(fold[static_cast<size_t>(i)])].push_back(i);
    parallel_for(folds, [&](int64_t f) {
        const auto& rows = rows_of[static_cast<size_t>(f)];
        Matrix xf = take_rows(X, rows);
        Vector yf = take_rows(y, rows);
        s_fold[static_cast<size_t>(f)] = xf.transpose() * xf;
        t_fold[static_cast<size_t>(f)] = xf.transpose() * yf;
        u_fold[static_cast<size_t>(f)] = xf.colwise().sum().transpose();
        sy_fold[static_cast<size_t>(f)] = yf.sum();
        n_fold[static_cast<size_t>(f)] = static_cast<Index>(rows.size());
    });
    Matrix s_all = Matrix::Zero(k, k);
    Vector t_all = Vector::Zero(k), u_all = Vector::Zero(k);
    double sy_all = 0.0;
    for (int f = 0; f < folds; ++f) {
        s_all += s_fold[static_cast<size_t>(f)];
        t_all += t_fold[static_cast<size_t>(f)];
        u_all += u_fold[static_cast<size_t>(f)];
        sy_all += sy_fold[static_cast<size_t>(f)];
    }

    std::vector<double> sse(lambda_grid.size() * static_cast<size_t>(folds), 0.0);
    parallel_for(folds, [&](int64_t f) {
        const Index n_tr = n - n_fold[static_cast<size_t>(f)];
        if (n_tr < 2) throw std::invalid_argument("ridge_cv: fold leaves too few training rows");
        const Vector m = (u_all - u_fold[static_cast<size_t>(f)]) / static_cast<double>(n_tr);
        const double ym = (sy_all - sy_fold[static_cast<size_t>(f)]) / static_cast<double>(n_tr);
        Matrix gc = s_all - s_fold[static_cast<size_t>(f)] -
                    static_cast<double>(n_tr) * m * m.transpose();
        const Vector b = t_all - t_fold[static_cast<size_t>(f)] - static_cast<double>(n_tr) * ym * m;
        const auto& rows = rows_of[static_cast<size_t>(f)];
        Matrix xf = take_rows(X, rows);
        Vector yf = take_rows(y, rows);
        for (size_t li = 0; li < lambda_grid.size(); ++li) {
            Matrix gl = gc;
            gl.diagonal().array() += lambda_grid[li];
            const Vector beta = gl.ldlt().solve(b);
            const double b0 = ym - m.dot(beta);
            const Vector resid = (yf.array() - (xf * beta).array() - b0).matrix();
            sse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)] =
                resid.squaredNorm() / static_cast<double>(rows.size());
        }
    });

    std::vector<double> cv_rmse(lambda_grid.size(), 0.0);
    for (size_t li = 0; li < lambda_grid.size(); ++li) {
        double acc = 0.0;
        for (int f = 0; f < folds; ++f)
            acc += std::sqrt(sse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)]);
        cv_rmse[li] = acc / folds;
    }

    const size_t best = select_lambda(lambda_grid, cv_rmse);
    LinearFit fit = ridge_fit(X, y, lambda_grid[best]);
    fit.cv_profile = make_profile(lambda_grid, cv_rmse);
    return fit;
}

double lasso_lambda_max(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y) {
    Centered c = center(X, y);
    return (c.X.transpose() * c.y).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

std::vector<double> log_spaced_grid(double hi, double lo, int count) {
    if (!(hi > 0) || !(lo > 0) || !(hi > lo)) throw std::invalid_argument("bad grid endpoints");
    if (count < 2) return {hi};
    std::vector<double> grid(static_cast<size_t>(count));
    const double step = (std::log(lo) - std::log(hi)) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<size_t>(i)] = std::exp(std::log(hi) + step * i);
    return grid;
}

std::vector<LassoPathPoint> lasso_path(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const std::vector<double>& lambdas) {
    validate_grid(lambdas);
    Centered c = center(X, y);
    const double n_inv = 1.0 / static_cast<double>(X.rows());
    const Matrix gram = (c.X.transpose() * c.X) * n_inv;
    const Vector col_msq = gram.diagonal();

    Vector beta = Vector::Zero(X.cols());
    Vector grad = (c.X.transpose() * c.y) * n_inv;
    std::vector<LassoPathPoint> path;
    path.reserve(lambdas.size());
    for (double lambda : lambdas) {
        cd_solve(gram, col_msq, beta, grad, lambda);
        path.push_back({lambda, beta, c.y_mean - c.x_mean.dot(beta)});
    }
    return path;
}

double lasso_objective(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& coef, double intercept, double lambda) {
    const Vector r = (y.array() - (X * coef).array() - intercept).matrix();
    return 0.5 * r.squaredNorm() / static_cast<double>(X.rows()) + lambda * coef.lpNorm<1>();
}

double lasso_kkt_violation(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                           const Eigen::Ref<const Vector>& coef, double intercept, double lambda) {
    const Vector r = (y.array() - (X * coef).array() - intercept).matrix();
    const Vector g = X.transpose() * r / static_cast<double>(X.rows());
    double worst = 0.0;
    for (Index j = 0; j < coef.size(); ++j) {
        if (coef[j] == 0.0) {
            worst = std::max(worst, std::abs(g[j]) - lambda);
        } else {
            worst = std::max(worst, std::abs(g[j] - lambda * (coef[j] > 0 ? 1.0 : -1.0)));
        }
    }
    return worst;
}

LinearFit lasso_cv(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                   const std::vector<double>& lambda_grid, int folds, uint64_t seed) {
    validate_grid(lambda_grid);
    const Index n = X.rows();
    const auto fold = fold_assignment(n, folds, seed);

    std::vector<double> fold_rmse(lambda_grid.size() * static_cast<size_t>(folds), 0.0);
    parallel_for(folds, [&](int64_t f) {
        std::vector<Index> tr, ho;
        for (Index i = 0; i < n; ++i)
            (fold[static_cast<size_t>(i)] == f ? ho : tr).push_back(i);
        Matrix xtr = take_rows(X, tr), xho = take_rows(X, ho);
        Vector ytr = take_rows(y, tr), yho = take_rows(y, ho);
        const auto path = lasso_path(xtr, ytr, lambda_grid);
        for (size_t li = 0; li < path.size(); ++li) {
            const Vector resid =
                (yho.array() - (xho * path[li].coef).array() - path[li].intercept).matrix();
            fold_rmse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)] =
                std::sqrt(resid.squaredNorm() / static_cast<double>(ho.size()));
        }
    });
    std::vector<double> cv_rmse(lambda_grid.size(), 0.0);
    for (size_t li = 0; li < lambda_grid.size(); ++li) {
        for (int f = 0; f < folds; ++f)
            cv_rmse[li] += fold_rmse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)];
        cv_rmse[li] /= folds;
    }

    const size_t best = select_lambda(lambda_grid, cv_rmse);
    const auto path = lasso_path(X, y, lambda_grid);
    LinearFit fit;
    fit.coef = path[best].coef;
    fit.intercept = path[best].intercept;
    fit.lambda = lambda_grid[best];
    fit.cv_profile = make_profile(lambda_grid, cv_rmse);
    return fit;
}

LinearFit logistic_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const IntVector>& d) {
    const Index n = X.rows();
    const Index k = X.cols();
    const int ones = d.sum();
    if (ones == 0 || ones == n)
        throw std::invalid_argument("logistic_fit: both classes must be present");

    Matrix a(n, k + 1);
    a.col(0).setOnes();
    a.rightCols(k) = X;
    Vector dd = d.cast<double>();

    Vector theta = Vector::Zero(k + 1);
    Vector eta = Vector::Zero(n);
    Vector p = logistic_probs(eta);
    double dev = deviance(p, d);
    for (int it = 0; it < 100; ++it) {
        Vector w(n), z(n);
        for (Index i = 0; i < n; ++i) {
            w[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
            z[i] = eta[i] + (dd[i] - p[i]) / w[i];
        }
        const Matrix aw = a.array().colwise() * w.array();
        Vector theta_new = (aw.transpose() * a).ldlt().solve(aw.transpose() * z);
        // Step halving keeps the deviance monotone near separation.
        double dev_new;
        Vector eta_new, p_new;
        for (int half = 0;; ++half) {
            eta_new = a * theta_new;
            p_new = logistic_probs(eta_new);
            dev_new = deviance(p_new, d);
            if (dev_new <= dev + 1e-10 || half >= 20) break;
            theta_new = 0.5 * (theta_new + theta);
        }
        const double change = std::abs(dev - dev_new);
        theta = theta_new;
        eta = eta_new;
        p = p_new;
        dev = dev_new;
        if (change < 1e-8 * std::max(1.0, std::abs(dev))) break;
    }
    LinearFit fit;
    fit.coef = theta.tail(k);
    fit.intercept = theta[0];
    return fit;
}

double logistic_lasso_lambda_max(const Eigen::Ref<const Matrix>& X,
                                 const Eigen::Ref<const IntVector>& d) {
    Vector dd = d.cast<double>();
    Centered c = center(X, dd);
    return (c.X.transpose() * c.y).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

namespace {

// Majorized penalized logistic fit at one lambda. Ridge flavor keeps a
// cached factorization of (A'A/4 + lambda I~); lasso flavor runs inner
// coordinate descent on the working response with penalty 4*lambda.
struct PenalizedLogit {
    Vector coef;
    double intercept;
};

PenalizedLogit logit_ridge_at(const Matrix& a, const Eigen::Ref<const IntVector>& d,
                              double lambda, Vector theta0) {
    const Index k1 = a.cols();
    Matrix m = 0.25 * (a.transpose() * a);
    for (Index j = 1; j < k1; ++j) m(j, j) += lambda;
    Eigen::LDLT<Matrix> solver(m);
    Vector dd = d.cast<double>();

    Vector theta = std::move(theta0);
    Vector eta = a * theta;
    Vector p = logistic_probs(eta);
    double obj = deviance(p, d) / 2.0 + 0.5 * lambda * theta.tail(k1 - 1).squaredNorm();
    for (int it = 0; it < 500; ++it) {
        Vector g = a.transpose() * (p - dd);
        g.tail(k1 - 1) += lambda * theta.tail(k1 - 1);
        theta -= solver.solve(g);
        eta = a * theta;
        p = logistic_probs(eta);
        const double obj_new =
            deviance(p, d) / 2.0 + 0.5 * lambda * theta.tail(k1 - 1).squaredNorm();
        const double change = std::abs(obj - obj_new);
        obj = obj_new;
        if (change < 1e-8 * std::max(1.0, std::abs(obj))) break;
    }
    return {theta.tail(k1 - 1), theta[0]};
}

PenalizedLogit logit_lasso_at(const Matrix& xc, const Matrix& gram, const Vector& x_mean,
                              const Eigen::Ref<const IntVector>& d, double lambda, Vector beta0,
                              double b0) {
    const Index n = xc.rows();
    const double n_inv = 1.0 / static_cast<double>(n);
    const Vector col_msq = gram.diagonal();
    Vector dd = d.cast<double>();

    Vector beta = std::move(beta0);
    double intercept = b0;  // intercept on the centered scale
    Vector eta = xc * beta;
    eta.array() += intercept;
    Vector p = logistic_probs(eta);
    double obj = deviance(p, d) / (2.0 * n) + lambda * beta.lpNorm<1>();
    for (int it = 0; it < 200; ++it) {
        // Working response for the 1/4-bound majorization.
        Vector z = eta + 4.0 * (dd - p);
        const double zm = z.mean();
        Vector grad = (xc.transpose() * ((z.array() - zm).matrix() - xc * beta)) * n_inv;
        cd_solve(gram, col_msq, beta, grad, 4.0 * lambda);
        intercept = zm;
        eta = xc * beta;
        eta.array() += intercept;
        p = logistic_probs(eta);
        const double obj_new = deviance(p, d) / (2.0 * n) + lambda * beta.lpNorm<1>();
        const double change = std::abs(obj - obj_new);
        obj = obj_new;
        if (change < 1e-8 * std::max(1.0, std::abs(obj))) break;
    }
    return {beta, intercept - x_mean.dot(beta)};
}

using PenalizedFitter = std::function<std::vector<PenalizedLogit>(
    const Matrix& x, const IntVector& d, const std::vector<double>& grid)>;

LinearFit penalized_logistic_cv(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const IntVector>& d,
                                const std::vector<double>& lambda_grid, int folds, uint64_t seed,
                                const PenalizedFitter& fit_path) {
    validate_grid(lambda_grid);
    const Index n = X.rows();
    const int ones = d.sum();
    if (ones == 0 || ones == n)
        throw std::invalid_argument("penalized logistic: both classes must be present");
    const auto fold = fold_assignment(n, folds, seed);

    std::vector<double> fold_rmse(lambda_grid.size() * static_cast<size_t>(folds), 0.0);
    parallel_for(folds, [&](int64_t f) {
        std::vector<Index> tr, ho;
        for (Index i = 0; i < n; ++i)
            (fold[static_cast<size_t>(i)] == f ? ho : tr).push_back(i);
        Matrix xtr = take_rows(X, tr), xho = take_rows(X, ho);
        IntVector dtr = take_rows(d, tr), dho = take_rows(d, ho);
        if (dtr.sum() == 0 || dtr.sum() == static_cast<int>(tr.size()))
            throw std::invalid_argument("penalized logistic: fold has a single class");
        const auto path = fit_path(xtr, dtr, lambda_grid);
        for (size_t li = 0; li < path.size(); ++li) {
            Vector eta = xho * path[li].coef;
            eta.array() += path[li].intercept;
            const Vector p = logistic_probs(eta);
            const Vector resid = dho.cast<double>() - p;
            fold_rmse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)] =
                std::sqrt(resid.squaredNorm() / static_cast<double>(ho.size()));
        }
    });
    std::vector<double> cv_rmse(lambda_grid.size(), 0.0);
    for (size_t li = 0; li < lambda_grid.size(); ++li) {
        for (int f = 0; f < folds; ++f)
            cv_rmse[li] += fold_rmse[li * static_cast<size_t>(folds) + static_cast<size_t>(f)];
        cv_rmse[li] /= folds;
    }

    const size_t best = select_lambda(lambda_grid, cv_rmse);
    const auto path = fit_path(X, d, lambda_grid);
    LinearFit fit;
    fit.coef = path[best].coef;
    fit.intercept = path[best].intercept;
    fit.lambda = lambda_grid[best];
    fit.cv_profile = make_profile(lambda_grid, cv_rmse);
    return fit;
}

}  // namespace

LinearFit logistic_ridge_cv(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const IntVector>& d,
                            const std::vector<double>& lambda_grid, int folds, uint64_t seed) {
    PenalizedFitter fitter = [](const Matrix& x, const IntVector& dd,
                                const std::vector<double>& grid) {
        Matrix a(x.rows(), x.cols() + 1);
        a.col(0).setOnes();
        a.rightCols(x.cols()) = x;
        std::vector<PenalizedLogit> path;
        path.reserve(grid.size());
        Vector theta = Vector::Zero(x.cols() + 1);
        for (double lambda : grid) {
            auto fit = logit_ridge_at(a, dd, lambda, theta);
            theta.resize(x.cols() + 1);
            theta[0] = fit.intercept;
            theta.tail(x.cols()) = fit.coef;
            path.push_back(std::move(fit));
        }
        return path;
    };
    return penalized_logistic_cv(X, d, lambda_grid, folds, seed, fitter);
}

LinearFit logistic_lasso_cv(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const IntVector>& d,
                            const std::vector<double>& lambda_grid, int folds, uint64_t seed) {
    PenalizedFitter fitter = [](const Matrix& x, const IntVector& dd,
                                const std::vector<double>& grid) {
        Vector x_mean = x.colwise().mean().transpose();
        Matrix xc = x.rowwise() - x_mean.transpose();
        const Matrix gram = (xc.transpose() * xc) / static_cast<double>(x.rows());
        std::vector<PenalizedLogit> path;
        path.reserve(grid.size());
        Vector beta = Vector::Zero(x.cols());
        double b0 = 0.0;
        for (double lambda : grid) {
            auto fit = logit_lasso_at(xc, gram, x_mean, dd, lambda, beta, b0);
            beta = fit.coef;
            b0 = fit.intercept + x_mean.dot(fit.coef);
            path.push_back(std::move(fit));
        }
        return path;
    };
    return penalized_logistic_cv(X, d, lambda_grid, folds, seed, fitter);
}

}  // namespace demand
